#include "copfl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "copfl/errors.hpp"

namespace copfl {

namespace {

using Json = nlohmann::ordered_json;

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> curr(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, subst});
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

// Strict object reader: every key must be consumed, leftovers raise a
// ConfigError with a nearest-key suggestion.
class StrictObject {
public:
    StrictObject(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) {
            throw ConfigError(path_ + ": expected a JSON object");
        }
    }

    bool has(const std::string& key) {
        consumed_.push_back(key);
        return node_.contains(key);
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        consumed_.push_back(key);
        if (!node_.contains(key)) return fallback;
        return read<T>(key);
    }

    template <typename T>
    T require(const std::string& key) {
        consumed_.push_back(key);
        if (!node_.contains(key)) {
            throw ConfigError(path_ + ": missing required key '" + key + "'");
        }
        return read<T>(key);
    }

    const Json& raw(const std::string& key) {
        consumed_.push_back(key);
        return node_.at(key);
    }

    void finish() const {
        for (const auto& [key, value] : node_.items()) {
            if (std::find(consumed_.begin(), consumed_.end(), key) != consumed_.end()) continue;
            std::string message = path_ + ": unknown key '" + key + "'";
            std::size_t best = 3;
            std::string suggestion;
            for (const std::string& known : consumed_) {
                const std::size_t dist = edit_distance(key, known);
                if (dist < best) {
                    best = dist;
                    suggestion = known;
                }
            }
            if (!suggestion.empty()) {
                message += "; did you mean '" + suggestion + "'?";
            }
            throw ConfigError(message);
        }
    }

private:
    template <typename T>
    T read(const std::string& key) {
        try {
            return node_.at(key).get<T>();
        } catch (const Json::exception&) {
            throw ConfigError(path_ + "." + key + ": wrong value type");
        }
    }

    const Json& node_;
    std::string path_;
    std::vector<std::string> consumed_;
};

void require_range(bool ok, const std::string& field, const std::string& range) {
    if (!ok) {
        throw ConfigError(field + " " + range);
    }
}

void apply_override(Json& doc, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    }
    const std::string key_path = assignment.substr(0, eq);
    const std::string value_text = assignment.substr(eq + 1);

    Json value;
    try {
        value = Json::parse(value_text);
    } catch (const Json::exception&) {
        value = value_text;  // bare strings are allowed unquoted
    }

    Json* node = &doc;
    std::size_t begin = 0;
    while (true) {
        const std::size_t dot = key_path.find('.', begin);
        const std::string part = key_path.substr(begin, dot - begin);
        if (part.empty()) {
            throw ConfigError("override '" + assignment + "' has an empty key segment");
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            break;
        }
        if (!node->contains(part) || !(*node)[part].is_object()) {
            (*node)[part] = Json::object();
        }
        node = &(*node)[part];
        begin = dot + 1;
    }
}

ExperimentConfig from_json(const Json& doc) {
    ExperimentConfig config;
    StrictObject root(doc, "config");

    const std::string algo_name = root.require<std::string>("algorithm");
    const auto algo = algorithm_from_name(algo_name);
    if (!algo) {
        throw ConfigError("algorithm '" + algo_name +
                          "' not one of co_pfl|fedavg|fedavg_ft|local_only|fixed_head");
    }
    config.algorithm = *algo;
    config.seed = root.require<std::uint64_t>("seed");

    config.rounds = root.get<int>("rounds", config.rounds);
    config.clients = root.get<int>("clients", config.clients);
    config.local_iters = root.get<int>("local_iters", config.local_iters);
    config.batch_size = root.get<int>("batch_size", config.batch_size);
    config.lr = root.get<double>("lr", config.lr);
    config.beta1 = root.get<double>("beta1", config.beta1);
    config.beta2 = root.get<double>("beta2", config.beta2);
    config.epsilon = root.get<double>("epsilon", config.epsilon);
    config.p = root.get<double>("p", config.p);
    config.gamma = root.get<double>("gamma", config.gamma);
    config.eval_every = root.get<int>("eval_every", config.eval_every);
    config.ft_steps = root.get<int>("ft_steps", config.ft_steps);
    config.renorm_per_coord = root.get<bool>("renorm_per_coord", config.renorm_per_coord);
    config.output_dir = root.get<std::string>("output_dir", config.output_dir);

    if (root.has("cowa")) {
        StrictObject cowa(root.raw("cowa"), "config.cowa");
        config.cowa.enabled = cowa.get<bool>("enabled", config.cowa.enabled);
        config.cowa.use_grad = cowa.get<bool>("use_grad", config.cowa.use_grad);
        config.cowa.use_data = cowa.get<bool>("use_data", config.cowa.use_data);
        config.cowa.normalize_components =
            cowa.get<bool>("normalize_components", config.cowa.normalize_components);
        config.cowa.shared_only_direction =
            cowa.get<bool>("shared_only_direction", config.cowa.shared_only_direction);
        cowa.finish();
    }
    if (root.has("mamo")) {
        StrictObject mamo(root.raw("mamo"), "config.mamo");
        config.mamo.literal_decay = mamo.get<bool>("literal_decay", config.mamo.literal_decay);
        mamo.finish();
    }
    if (root.has("model")) {
        StrictObject model(root.raw("model"), "config.model");
        const std::string kind = model.get<std::string>("kind", "mlp2");
        if (kind == "softmax_regression") {
            config.model.kind = ModelKind::softmax_regression;
        } else if (kind == "mlp2") {
            config.model.kind = ModelKind::mlp2;
        } else {
            throw ConfigError("model.kind '" + kind + "' not one of softmax_regression|mlp2");
        }
        config.model.input_dim = model.get<int>("input_dim", config.model.input_dim);
        config.model.hidden_dim = model.get<int>("hidden_dim", config.model.hidden_dim);
        config.model.num_classes = model.get<int>("num_classes", config.model.num_classes);
        model.finish();
    }
    if (root.has("data")) {
        StrictObject data(root.raw("data"), "config.data");
        config.data.source = data.get<std::string>("source", config.data.source);
        config.data.csv_path = data.get<std::string>("csv_path", config.data.csv_path);
        config.data.classes_per_client =
            data.get<int>("classes_per_client", config.data.classes_per_client);
        config.data.train_bound = data.get<int>("train_bound", config.data.train_bound);
        config.data.test_bound = data.get<int>("test_bound", config.data.test_bound);
        config.data.samples_per_class =
            data.get<int>("samples_per_class", config.data.samples_per_class);
        config.data.noise_scale = data.get<double>("noise_scale", config.data.noise_scale);
        config.data.mean_scale = data.get<double>("mean_scale", config.data.mean_scale);
        config.data.mean_decay = data.get<double>("mean_decay", config.data.mean_decay);
        config.data.mean_offset = data.get<double>("mean_offset", config.data.mean_offset);
        config.data.feature_shift = data.get<bool>("feature_shift", config.data.feature_shift);
        config.data.feature_shift_scale =
            data.get<double>("feature_shift_scale", config.data.feature_shift_scale);
        data.finish();
    }
    root.finish();

    require_range(config.rounds >= 1, "rounds", ">= 1");
    require_range(config.clients >= 1, "clients", ">= 1");
    require_range(config.local_iters >= 1, "local_iters", ">= 1");
    require_range(config.batch_size >= 1, "batch_size", ">= 1");
    require_range(config.lr > 0.0, "lr", "> 0");
    require_range(config.beta1 > 0.0 && config.beta1 < 1.0, "beta1", "∈ (0,1)");
    require_range(config.beta2 > 0.0 && config.beta2 < 1.0, "beta2", "∈ (0,1)");
    require_range(config.epsilon > 0.0, "epsilon", "> 0");
    require_range(config.p >= 0.0 && config.p <= 1.0, "p", "∈ [0,1]");
    require_range(config.gamma >= 0.0 && config.gamma <= 1.0, "gamma", "∈ [0,1]");
    require_range(config.eval_every >= 1, "eval_every", ">= 1");
    require_range(config.ft_steps >= 0, "ft_steps", ">= 0");
    require_range(config.model.input_dim >= 1, "model.input_dim", ">= 1");
    require_range(config.model.num_classes >= 2, "model.num_classes", ">= 2");
    if (config.model.kind == ModelKind::mlp2) {
        require_range(config.model.hidden_dim >= 1, "model.hidden_dim", ">= 1");
    }
    require_range(config.data.source == "synthetic" || config.data.source == "csv",
                  "data.source", "∈ {synthetic, csv}");
    if (config.data.source == "csv") {
        require_range(!config.data.csv_path.empty(), "data.csv_path",
                      "must be set when data.source is csv");
    }
    require_range(config.data.classes_per_client >= 1 &&
                      config.data.classes_per_client <= config.model.num_classes,
                  "data.classes_per_client", "∈ [1, model.num_classes]");
    require_range(config.data.train_bound >= 1, "data.train_bound", ">= 1");
    require_range(config.data.test_bound >= 1, "data.test_bound", ">= 1");
    require_range(config.data.samples_per_class >= 0, "data.samples_per_class", ">= 0");
    require_range(config.data.noise_scale >= 0.0, "data.noise_scale", ">= 0");
    require_range(config.data.mean_scale >= 0.0, "data.mean_scale", ">= 0");
    require_range(config.data.mean_decay >= 0.0, "data.mean_decay", ">= 0");
    require_range(config.data.mean_offset >= 0.0, "data.mean_offset", ">= 0");
    require_range(config.data.feature_shift_scale >= 0.0, "data.feature_shift_scale", ">= 0");
    return config;
}

Json to_json_doc(const ExperimentConfig& c) {
    Json doc;
    doc["algorithm"] = algorithm_name(c.algorithm);
    doc["seed"] = c.seed;
    doc["rounds"] = c.rounds;
    doc["clients"] = c.clients;
    doc["local_iters"] = c.local_iters;
    doc["batch_size"] = c.batch_size;
    doc["lr"] = c.lr;
    doc["beta1"] = c.beta1;
    doc["beta2"] = c.beta2;
    doc["epsilon"] = c.epsilon;
    doc["p"] = c.p;
    doc["gamma"] = c.gamma;
    doc["eval_every"] = c.eval_every;
    doc["ft_steps"] = c.ft_steps;
    doc["renorm_per_coord"] = c.renorm_per_coord;
    doc["output_dir"] = c.output_dir;
    doc["cowa"] = {{"enabled", c.cowa.enabled},
                   {"use_grad", c.cowa.use_grad},
                   {"use_data", c.cowa.use_data},
                   {"normalize_components", c.cowa.normalize_components},
                   {"shared_only_direction", c.cowa.shared_only_direction}};
    doc["mamo"] = {{"literal_decay", c.mamo.literal_decay}};
    doc["model"] = {
        {"kind", c.model.kind == ModelKind::mlp2 ? "mlp2" : "softmax_regression"},
        {"input_dim", c.model.input_dim},
        {"hidden_dim", c.model.hidden_dim},
        {"num_classes", c.model.num_classes}};
    doc["data"] = {{"source", c.data.source},
                   {"csv_path", c.data.csv_path},
                   {"classes_per_client", c.data.classes_per_client},
                   {"train_bound", c.data.train_bound},
                   {"test_bound", c.data.test_bound},
                   {"samples_per_class", c.data.samples_per_class},
                   {"noise_scale", c.data.noise_scale},
                   {"mean_scale", c.data.mean_scale},
                   {"mean_decay", c.data.mean_decay},
                   {"mean_offset", c.data.mean_offset},
                   {"feature_shift", c.data.feature_shift},
                   {"feature_shift_scale", c.data.feature_shift_scale}};
    return doc;
}

ExperimentConfig parse_document(Json doc, const std::vector<std::string>& overrides) {
    for (const std::string& assignment : overrides) {
        apply_override(doc, assignment);
    }
    return from_json(doc);
}

}  // namespace

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream file(path);
    if (!file) {
        throw ConfigError("cannot open config file: " + path);
    }
    Json doc;
    try {
        doc = Json::parse(file);
    } catch (const Json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_document(std::move(doc), overrides);
}

ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides) {
    Json doc;
    try {
        doc = Json::parse(json_text);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_document(std::move(doc), overrides);
}

std::string config_to_json(const ExperimentConfig& config) {
    return to_json_doc(config).dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string dump = to_json_doc(config).dump();
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

HyperParams hyper_from_config(const ExperimentConfig& config) {
    HyperParams hyper;
    hyper.local_iters = config.local_iters;
    hyper.batch_size = config.batch_size;
    hyper.lr = config.lr;
    hyper.beta1 = config.beta1;
    hyper.beta2 = config.beta2;
    hyper.epsilon = config.epsilon;
    hyper.pers.rate = config.p;
    hyper.pers.budget = config.gamma;
    hyper.mamo_literal_decay = config.mamo.literal_decay;
    hyper.renorm_per_coord = config.renorm_per_coord;
    hyper.cowa = config.cowa;
    hyper.ft_steps = config.ft_steps;
    hyper.seed = config.seed;
    return hyper;
}

PartitionSpec partition_from_config(const ExperimentConfig& config) {
    PartitionSpec spec;
    spec.num_clients = config.clients;
    spec.classes_per_client = config.data.classes_per_client;
    spec.train_bound = config.data.train_bound;
    spec.test_bound = config.data.test_bound;
    spec.num_classes = config.model.num_classes;
    spec.seed = config.seed;
    return spec;
}

int pool_samples_per_class(const ExperimentConfig& config) {
    if (config.data.samples_per_class > 0) {
        return config.data.samples_per_class;
    }
    // Exactly the worst-case demand of the round-robin assignment.
    const int total_picks = config.clients * config.data.classes_per_client;
    const int max_per_class =
        (total_picks + config.model.num_classes - 1) / config.model.num_classes;
    return max_per_class * (config.data.train_bound + config.data.test_bound);
}

}  // namespace copfl
