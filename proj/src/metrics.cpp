#include "copfl/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace copfl {

std::string format_g9(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

std::string rounds_csv(const std::vector<RoundRecord>& records) {
    std::string out = "round,client_id,test_acc,train_loss,alpha,gamma_grad,gamma_data,mask_popcount\n";
    for (const RoundRecord& record : records) {
        for (const ClientRoundMetrics& c : record.clients) {
            out += std::to_string(record.round);
            out += ',';
            out += std::to_string(c.client_id);
            out += ',';
            out += format_g9(c.test_acc);
            out += ',';
            out += format_g9(c.train_loss);
            out += ',';
            out += format_g9(c.alpha);
            out += ',';
            out += format_g9(c.gamma_grad);
            out += ',';
            out += format_g9(c.gamma_data);
            out += ',';
            out += std::to_string(c.mask_popcount);
            out += '\n';
        }
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    file << content;
    if (!file) {
        throw std::runtime_error("write failed: " + path);
    }
}

}  // namespace copfl
