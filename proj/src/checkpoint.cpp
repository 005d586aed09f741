#include "centershift/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

#include "centershift/errors.hpp"

namespace centershift {

namespace {

using nlohmann::json;

json mlp_to_json(const MLPParams& params) {
    json j;
    std::vector<std::size_t> dims{params.input_dim()};
    for (const auto& layer : params.layers) dims.push_back(layer.weight.rows);
    j["dims"] = dims;
    j["output_activation"] =
        params.output_activation == OutputActivation::sigmoid ? "sigmoid" : "identity";
    json weights = json::array();
    json biases = json::array();
    for (const auto& layer : params.layers) {
        weights.push_back(layer.weight.data);
        biases.push_back(layer.bias);
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    return j;
}

MLPParams mlp_from_json(const json& j) {
    MLPParams params;
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() < 2) throw io_error("checkpoint: bad network dims");
    params.output_activation = j.at("output_activation").get<std::string>() == "sigmoid"
                                   ? OutputActivation::sigmoid
                                   : OutputActivation::identity;
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != dims.size() - 1 || biases.size() != dims.size() - 1) {
        throw io_error("checkpoint: layer count mismatch");
    }
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        LayerParams layer;
        layer.weight = Matrix2D(dims[l + 1], dims[l]);
        layer.weight.data = weights[l].get<std::vector<double>>();
        layer.bias = biases[l].get<std::vector<double>>();
        if (layer.weight.data.size() != dims[l + 1] * dims[l] ||
            layer.bias.size() != dims[l + 1]) {
            throw io_error("checkpoint: parameter array size mismatch");
        }
        params.layers.push_back(std::move(layer));
    }
    return params;
}

json config_to_json(const TrainConfig& config) {
    json j;
    j["mode"] = to_string(config.mode);
    j["iterations"] = config.iterations;
    j["refresh_every"] = config.refresh_every;
    j["alpha"] = config.margins.alpha;
    j["beta"] = config.margins.beta;
    j["target_weight"] = config.target_weight;
    j["pseudo_start"] = config.pseudo_start;
    j["lr_net"] = config.lr_net;
    j["lr_centers"] = config.lr_centers;
    j["batch_size"] = config.batch_size;
    j["embedding_dim"] = config.embedding_dim;
    j["generator_hidden"] = config.generator_hidden;
    j["discriminator_hidden"] = config.discriminator_hidden;
    if (config.lambda_c) {
        j["lambda_c"] = *config.lambda_c;
    } else {
        j["lambda_c"] = nullptr;
    }
    j["seed"] = config.seed;
    j["log_every"] = config.log_every;
    return j;
}

TrainConfig config_from_json(const json& j) {
    TrainConfig config;
    config.mode = mode_from_string(j.at("mode").get<std::string>());
    config.iterations = j.at("iterations").get<std::size_t>();
    config.refresh_every = j.at("refresh_every").get<std::size_t>();
    config.margins.alpha = j.at("alpha").get<double>();
    config.margins.beta = j.at("beta").get<double>();
    config.target_weight = j.at("target_weight").get<double>();
    config.pseudo_start = j.at("pseudo_start").get<std::size_t>();
    config.lr_net = j.at("lr_net").get<double>();
    config.lr_centers = j.at("lr_centers").get<double>();
    config.batch_size = j.at("batch_size").get<std::size_t>();
    config.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    config.generator_hidden = j.at("generator_hidden").get<std::vector<std::size_t>>();
    config.discriminator_hidden = j.at("discriminator_hidden").get<std::vector<std::size_t>>();
    if (!j.at("lambda_c").is_null()) config.lambda_c = j.at("lambda_c").get<double>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.log_every = j.at("log_every").get<std::size_t>();
    return config;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainResult& result) {
    json j;
    j["schema_version"] = kCheckpointSchemaVersion;
    j["config"] = config_to_json(result.config);
    j["generator"] = mlp_to_json(result.generator);
    j["discriminator"] = result.discriminator ? mlp_to_json(*result.discriminator) : json(nullptr);
    j["head"] = result.head ? mlp_to_json(*result.head) : json(nullptr);
    if (result.centers) {
        json c;
        c["shared"] = result.centers->shared;
        c["class_count"] = result.centers->class_count();
        c["dim"] = result.centers->dim();
        c["values"] = result.centers->centers.data;
        if (result.centers->shared) {
            c["target_values"] = nullptr;
        } else {
            c["target_values"] = result.centers->target_centers.data;
        }
        j["centers"] = std::move(c);
    } else {
        j["centers"] = nullptr;
    }
    j["pseudo_labels"] = result.pseudo.labels;
    j["pseudo_weights"] = result.pseudo.weights;

    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw io_error("failed writing " + path.string());
}

TrainResult load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error(path.string() + ": " + e.what());
    }
    try {
        if (j.at("schema_version").get<int>() != kCheckpointSchemaVersion) {
            throw io_error(path.string() + ": unsupported checkpoint schema version");
        }
        TrainResult result;
        result.config = config_from_json(j.at("config"));
        result.generator = mlp_from_json(j.at("generator"));
        if (!j.at("discriminator").is_null()) {
            result.discriminator = mlp_from_json(j.at("discriminator"));
        }
        if (!j.at("head").is_null()) result.head = mlp_from_json(j.at("head"));
        if (!j.at("centers").is_null()) {
            const auto& c = j.at("centers");
            CenterSet cs;
            cs.shared = c.at("shared").get<bool>();
            const auto rows = c.at("class_count").get<std::size_t>();
            const auto cols = c.at("dim").get<std::size_t>();
            cs.centers = Matrix2D(rows, cols);
            cs.centers.data = c.at("values").get<std::vector<double>>();
            if (cs.centers.data.size() != rows * cols) {
                throw io_error(path.string() + ": center array size mismatch");
            }
            if (!cs.shared) {
                cs.target_centers = Matrix2D(rows, cols);
                cs.target_centers.data = c.at("target_values").get<std::vector<double>>();
                if (cs.target_centers.data.size() != rows * cols) {
                    throw io_error(path.string() + ": target center array size mismatch");
                }
            }
            result.centers = std::move(cs);
        }
        result.pseudo.labels = j.at("pseudo_labels").get<std::vector<std::size_t>>();
        result.pseudo.weights = j.at("pseudo_weights").get<std::vector<double>>();
        return result;
    } catch (const json::exception& e) {
        throw io_error(path.string() + ": " + e.what());
    }
}

}  // namespace centershift
