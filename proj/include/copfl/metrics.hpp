#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace copfl {

struct ClientRoundMetrics {
    int client_id = 0;
    double test_acc = 0.0;
    double train_loss = 0.0;
    double alpha = 0.0;
    double gamma_grad = 0.0;
    double gamma_data = 0.0;
    std::size_t mask_popcount = 0;
};

// One record per evaluated round.
struct RoundRecord {
    int round = 0;
    std::vector<ClientRoundMetrics> clients;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    double wall_ms = 0.0;
};

// Floats in CSV output carry 9 significant digits ("%.9g").
std::string format_g9(double value);

// Schema: round,client_id,test_acc,train_loss,alpha,gamma_grad,gamma_data,mask_popcount
// Header row, LF line endings, '.' decimal separator.
std::string rounds_csv(const std::vector<RoundRecord>& records);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace copfl
