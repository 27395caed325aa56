// Command-line surface for the Hamming embedding toolkit.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>

#include <CLI11.hpp>

#include "hve/compressor.hpp"
#include "hve/io.hpp"
#include "hve/metrics.hpp"
#include "hve/synthetic.hpp"
#include "hve/training.hpp"

namespace {

struct GlobalOpts {
    bool porcelain = false;
    bool quiet = false;
    std::uint64_t seed = 0;
};

std::string trim_number(double v) {
    std::ostringstream ss;
    ss.precision(10);
    ss << v;
    return ss.str();
}

std::string format_bytes(std::uint64_t bytes) {
    // decimal units, matching the usual disk-space convention
    static const char* units[] = {"B", "KB", "MB", "GB", "TB"};
    double v = static_cast<double>(bytes);
    int u = 0;
    while (v >= 1000.0 && u < 4) {
        v /= 1000.0;
        ++u;
    }
    return trim_number(v) + " " + units[u];
}

std::string effective_id(const std::vector<std::string>& ids, std::size_t i) {
    return ids.empty() ? std::to_string(i) : ids[i];
}

std::unordered_map<std::string, std::size_t> id_map(const std::vector<std::string>& ids,
                                                    std::size_t n) {
    std::unordered_map<std::string, std::size_t> map;
    map.reserve(n);
    for (std::size_t i = 0; i < n; ++i) map.emplace(effective_id(ids, i), i);
    return map;
}

char sniff_format(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    char magic[4] = {};
    in.read(magic, 4);
    if (std::string_view(magic, 4) == "HVE1") return 'e';
    if (std::string_view(magic, 4) == "HVC1") return 'c';
    return '?';
}

int cmd_train(const GlobalOpts& g, const std::string& input, const std::string& output,
              std::size_t bits, hve::TrainConfig cfg, double tau_final, bool has_tau_final) {
    cfg.seed = g.seed;
    if (has_tau_final) cfg.tau_final = tau_final;

    const hve::EmbeddingSet data = hve::load_embeddings(input);
    if (data.n == 0) throw std::runtime_error(input + ": no embeddings to train on");

    hve::EpochCallback log;
    if (!g.quiet)
        log = [](std::size_t epoch, double loss) {
            std::fprintf(stderr, "epoch %zu loss %.8g\n", epoch, loss);
        };

    auto [model, history] = hve::train(data, bits, cfg, log);

    hve::TrainMeta meta;
    meta.config = cfg;
    meta.final_loss = history.epoch_loss.back();
    meta.final_det_loss = hve::mean_deterministic_loss(model, data);
    meta.stop_reason = history.stop_reason;
    meta.epochs = static_cast<std::uint32_t>(history.epochs);
    hve::save_model(output, model, meta);

    if (g.porcelain) {
        std::cout << "epochs=" << history.epochs << "\n"
                  << "stop_reason="
                  << (history.stop_reason == hve::StopReason::Converged ? "converged" : "max_epochs")
                  << "\n"
                  << "final_loss=" << trim_number(meta.final_loss) << "\n"
                  << "final_det_loss=" << trim_number(meta.final_det_loss) << "\n";
    } else if (!g.quiet) {
        std::cout << "trained " << bits << "-bit compressor on " << data.n << " embeddings (d="
                  << data.d << ") in " << history.epochs << " epochs ("
                  << (history.stop_reason == hve::StopReason::Converged ? "converged" : "max epochs")
                  << ")\nfinal loss " << meta.final_loss << ", deterministic loss "
                  << meta.final_det_loss << "\nmodel written to " << output << "\n";
    }
    return 0;
}

int cmd_encode(const GlobalOpts& g, const std::string& model_path, const std::string& input,
               const std::string& output, bool report_loss) {
    auto [model, meta] = hve::load_model(model_path);
    const hve::EmbeddingSet data = hve::load_embeddings(input);
    if (data.n > 0 && data.d != model.d)
        throw std::runtime_error("dimension mismatch: model expects d=" + std::to_string(model.d) +
                                 ", embeddings have d=" + std::to_string(data.d));

    hve::CodeIndex index;
    double loss = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const hve::Vec e = data.row_vec(i);
        const hve::ForwardTrace t = hve::encode(model, e, nullptr);
        if (report_loss) loss += hve::reconstruction_loss(e, t.reconstruction);
        index.codes.push_back(hve::binarize(t.assignments));
    }
    index.ids = data.ids;
    index.labels = data.labels;
    hve::save_codes(output, index, model.b);

    if (report_loss) {
        const double mean = data.n ? loss / static_cast<double>(data.n) : 0.0;
        if (g.porcelain)
            std::cout << "det_loss=" << trim_number(mean) << "\n";
        else
            std::cout << "deterministic reconstruction loss " << mean << "\n";
    }
    if (!g.quiet && !g.porcelain)
        std::cout << "encoded " << data.n << " embeddings to " << model.b << "-bit codes: "
                  << output << "\n";
    return 0;
}

int cmd_baseline(const GlobalOpts& g, const std::string& input, const std::string& output,
                 std::string thresholds_path) {
    const hve::EmbeddingSet data = hve::load_embeddings(input);
    if (data.n == 0) throw std::runtime_error(input + ": need at least one embedding");
    auto [index, thresholds] = hve::median_binarize(data);
    hve::save_codes(output, index, data.d);

    if (thresholds_path.empty()) thresholds_path = output + ".thresholds.txt";
    std::ofstream ts(thresholds_path);
    if (!ts) throw std::runtime_error(thresholds_path + ": cannot open for writing");
    ts.precision(17);
    for (double t : thresholds) ts << t << "\n";

    if (!g.quiet && !g.porcelain)
        std::cout << "median baseline: " << data.n << " codes of " << data.d << " bits -> "
                  << output << " (thresholds: " << thresholds_path << ")\n";
    return 0;
}

int cmd_search(const GlobalOpts&, const std::string& codes_path, const std::string& query_id,
               const std::string& query_hex, std::size_t k) {
    const hve::CodeIndex index = hve::load_codes(codes_path);
    hve::BinaryCode query;
    if (!query_hex.empty()) {
        query = hve::parse_code_hex(query_hex, index.nbits());
    } else {
        const auto map = id_map(index.ids, index.size());
        const auto it = map.find(query_id);
        if (it == map.end()) throw std::runtime_error("unknown query id: " + query_id);
        query = index.codes[it->second];
    }
    for (const hve::Neighbor& nb : hve::knn_search(index, query, k))
        std::cout << nb.rank << '\t' << effective_id(index.ids, nb.pos) << '\t' << nb.distance
                  << '\n';
    return 0;
}

int cmd_eval_sim(const GlobalOpts& g, const std::string& payload_path,
                 const std::string& pairs_path, const std::string& metric) {
    const auto pairs = hve::load_pairs(pairs_path);
    if (pairs.empty()) throw std::runtime_error(pairs_path + ": no pairs to evaluate");

    const char kind = sniff_format(payload_path);
    hve::Vec truth, computed;
    truth.reserve(pairs.size());
    computed.reserve(pairs.size());

    if (metric == "cosine") {
        if (kind != 'e')
            throw std::runtime_error("metric cosine requires an embedding file, got " + payload_path);
        const hve::EmbeddingSet E = hve::load_embeddings(payload_path);
        const auto map = id_map(E.ids, E.n);
        for (const auto& p : pairs) {
            const auto a = map.find(p.id_a);
            const auto b = map.find(p.id_b);
            if (a == map.end() || b == map.end())
                throw std::runtime_error("pair references unknown id: " +
                                         (a == map.end() ? p.id_a : p.id_b));
            truth.push_back(p.score);
            computed.push_back(hve::cosine(E.row_vec(a->second), E.row_vec(b->second)));
        }
    } else if (metric == "hamming") {
        if (kind != 'c')
            throw std::runtime_error("metric hamming requires a code file, got " + payload_path);
        const hve::CodeIndex index = hve::load_codes(payload_path);
        const auto map = id_map(index.ids, index.size());
        for (const auto& p : pairs) {
            const auto a = map.find(p.id_a);
            const auto b = map.find(p.id_b);
            if (a == map.end() || b == map.end())
                throw std::runtime_error("pair references unknown id: " +
                                         (a == map.end() ? p.id_a : p.id_b));
            truth.push_back(p.score);
            // distance, so negate before correlating
            computed.push_back(-static_cast<double>(
                hve::hamming(index.codes[a->second], index.codes[b->second])));
        }
    } else {
        throw std::runtime_error("unknown metric: " + metric);
    }

    const auto rho = hve::eval_similarity(truth, computed);
    if (g.porcelain) {
        std::cout << "pairs=" << pairs.size() << "\n"
                  << "spearman=" << (rho ? trim_number(*rho) : "undefined") << "\n";
    } else {
        std::cout << "Spearman rho: " << (rho ? trim_number(*rho) : "undefined") << " over "
                  << pairs.size() << " pairs\n";
    }
    return 0;
}

int cmd_eval_knn(const GlobalOpts& g, const std::string& train_path, const std::string& test_path,
                 std::size_t k) {
    const hve::CodeIndex train = hve::load_codes(train_path);
    const hve::CodeIndex test = hve::load_codes(test_path);
    if (!train.has_labels()) throw std::runtime_error(train_path + ": missing labels");
    if (!test.has_labels()) throw std::runtime_error(test_path + ": missing labels");

    std::vector<std::string> predictions;
    predictions.reserve(test.size());
    std::map<std::pair<std::string, std::string>, std::size_t> confusion;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto vote = hve::knn_classify(train, test.codes[i], k);
        predictions.push_back(vote.label);
        ++confusion[{test.labels[i], vote.label}];
    }
    const double error = hve::classification_error(predictions, test.labels);

    if (g.porcelain) {
        std::cout << "n_test=" << test.size() << "\nk=" << k << "\nerror=" << trim_number(error)
                  << "\n";
        for (const auto& [key, count] : confusion)
            std::cout << "confusion." << key.first << "." << key.second << "=" << count << "\n";
    } else {
        std::cout << "classification error: " << trim_number(error) << " (" << test.size()
                  << " test docs, k=" << k << ")\nconfusion (truth -> predicted: count):\n";
        for (const auto& [key, count] : confusion)
            std::cout << "  " << key.first << " -> " << key.second << ": " << count << "\n";
    }
    return 0;
}

int cmd_correlation(const GlobalOpts& g, const std::string& path) {
    const char kind = sniff_format(path);
    hve::CorrelationReport report;
    if (kind == 'e')
        report = hve::avg_abs_correlation(hve::load_embeddings(path));
    else if (kind == 'c')
        report = hve::avg_abs_correlation(hve::load_codes(path));
    else
        report = hve::avg_abs_correlation(hve::load_embeddings(path));  // CSV fallback

    const double percent = 100.0 * report.avg_abs;
    if (g.porcelain) {
        std::cout << "avg_abs_correlation_percent=" << trim_number(percent) << "\n"
                  << "constant_dims=" << report.constant_dims.size() << "\n";
    } else {
        std::cout << "average absolute correlation: " << trim_number(percent) << "%\n"
                  << "constant dimensions: " << report.constant_dims.size() << "\n";
    }
    return 0;
}

int cmd_memreport(const GlobalOpts& g, std::uint64_t n, std::uint64_t d, std::uint64_t bits) {
    const hve::MemoryReport r = hve::memory_report(n, d, bits);
    if (g.porcelain) {
        std::cout << "original_bytes=" << r.original_bytes << "\n"
                  << "compressed_bytes=" << r.compressed_bytes << "\n"
                  << "ratio=" << trim_number(r.ratio) << "\n";
    } else {
        std::cout << format_bytes(r.original_bytes) << " -> " << format_bytes(r.compressed_bytes)
                  << " (" << trim_number(r.ratio) << ":1)\n";
    }
    return 0;
}

int cmd_export_bitmap(const GlobalOpts& g, const std::string& codes_path,
                      const std::string& output, const std::string& label_filter,
                      std::size_t sample) {
    const hve::CodeIndex index = hve::load_codes(codes_path);
    if (!label_filter.empty() && !index.has_labels())
        throw std::runtime_error(codes_path + ": label filter given but file has no labels");

    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < index.size(); ++i)
        if (label_filter.empty() || index.labels[i] == label_filter) selected.push_back(i);

    if (sample > 0 && sample < selected.size()) {
        hve::Rng rng(g.seed);
        rng.shuffle(selected);
        selected.resize(sample);
        std::sort(selected.begin(), selected.end());
    }

    std::vector<hve::BinaryCode> rows;
    rows.reserve(selected.size());
    for (std::size_t i : selected) rows.push_back(index.codes[i]);
    hve::export_pbm(output, rows);

    if (!g.quiet && !g.porcelain)
        std::cout << "wrote " << rows.size() << "x" << index.nbits() << " bitmap to " << output
                  << "\n";
    return 0;
}

int cmd_gen_synthetic(const GlobalOpts& g, const std::string& kind, const std::string& output,
                      std::size_t d, std::size_t bits, std::size_t n, std::size_t nclusters,
                      double flip, std::size_t nfactors, double noise,
                      const std::string& test_out, std::size_t test_n) {
    if (kind == "planted") {
        const hve::PlantedData data = hve::gen_planted(d, bits, n, g.seed);
        hve::save_embeddings(output, data.embeddings);
    } else if (kind == "factors") {
        hve::save_embeddings(output, hve::gen_factors(nfactors, d, n, noise, g.seed));
    } else if (kind == "clusters") {
        if (!test_out.empty() && test_n >= n)
            throw std::runtime_error("gen-synthetic: --test-n must be smaller than --n");
        const hve::CodeIndex all = hve::gen_clusters(bits, n, nclusters, flip, g.seed);
        if (test_out.empty()) {
            hve::save_codes(output, all);
        } else {
            hve::CodeIndex train, test;
            for (std::size_t i = 0; i < all.size(); ++i) {
                auto& dst = (i < all.size() - test_n) ? train : test;
                dst.push(all.codes[i], all.ids[i], all.labels[i]);
            }
            hve::save_codes(output, train);
            hve::save_codes(test_out, test);
        }
    } else {
        throw std::runtime_error("unknown synthetic kind: " + kind);
    }
    if (!g.quiet && !g.porcelain) std::cout << "wrote " << kind << " fixture to " << output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hve: compress sentence embeddings into Hamming codes and evaluate them"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_flag("--porcelain", g.porcelain, "machine-readable key=value output");
    app.add_flag("--quiet", g.quiet, "suppress progress output");
    app.add_option("--seed", g.seed, "seed for all stochastic steps")->capture_default_str();

    // train
    std::string in_path, out_path, model_path, test_out;
    std::size_t bits = 0;
    hve::TrainConfig cfg;
    cfg.max_epochs = 1000;
    double tau_final = 0.0;
    auto* train = app.add_subcommand("train", "fit a compressor by reconstruction error");
    train->add_option("embeddings", in_path, "input embedding file (HVE1 or CSV)")->required();
    train->add_option("-o,--output", out_path, "output model file")->required();
    train->add_option("-b,--bits", bits, "code length in bits (typical: 128, 256, 512)")
        ->required()
        ->check(CLI::PositiveNumber);
    train->add_option("--lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
    train->add_option("--batch", cfg.batch_size, "mini-batch size (0 = full batch)")
        ->capture_default_str();
    train->add_option("--max-epochs", cfg.max_epochs, "epoch budget")->capture_default_str();
    train->add_option("--patience", cfg.patience_window, "stopping window in epochs")
        ->capture_default_str();
    train->add_option("--delta", cfg.delta_tolerance, "loss-change tolerance for stopping")
        ->capture_default_str();
    train->add_option("--tau", cfg.tau, "softmax temperature")->capture_default_str();
    auto* tf = train->add_option("--tau-final", tau_final,
                                 "anneal tau linearly to this value over the first half of training");

    // encode
    bool report_loss = false;
    auto* encode = app.add_subcommand("encode", "binarize embeddings with a trained model (g=0)");
    encode->add_option("model", model_path, "model file")->required();
    encode->add_option("embeddings", in_path, "input embedding file")->required();
    encode->add_option("-o,--output", out_path, "output code file")->required();
    encode->add_flag("--reconstruct-loss", report_loss,
                     "also print the deterministic reconstruction loss");

    // baseline
    std::string thresholds_path;
    auto* baseline = app.add_subcommand("baseline", "median-threshold binarization");
    baseline->add_option("embeddings", in_path, "input embedding file")->required();
    baseline->add_option("-o,--output", out_path, "output code file")->required();
    baseline->add_option("--thresholds", thresholds_path,
                         "sidecar threshold file (default: <output>.thresholds.txt)");

    // search
    std::string query_id, query_hex;
    std::size_t k = 10;
    auto* search = app.add_subcommand("search", "brute-force Hamming nearest neighbors");
    search->add_option("codes", in_path, "code file")->required();
    auto* qid = search->add_option("--id", query_id, "query by record id");
    auto* qhex = search->add_option("--hex", query_hex, "query code as hex bytes (byte 0 = bits 0..7)");
    search->add_option("-k", k, "neighbor count")->check(CLI::PositiveNumber)->capture_default_str();
    qid->excludes(qhex);

    // eval-sim
    std::string pairs_path, metric;
    auto* eval_sim = app.add_subcommand("eval-sim", "Spearman correlation against scored pairs");
    eval_sim->add_option("payload", in_path, "embedding or code file")->required();
    eval_sim->add_option("pairs", pairs_path, "tab-separated id_a, id_b, score")->required();
    eval_sim->add_option("--metric", metric, "cosine (embeddings) or hamming (codes)")
        ->required()
        ->check(CLI::IsMember({"cosine", "hamming"}));

    // eval-knn
    std::string train_codes, test_codes;
    std::size_t knn_k = 10;
    auto* eval_knn = app.add_subcommand("eval-knn", "weighted k-NN classification error");
    eval_knn->add_option("train", train_codes, "labeled training code file")->required();
    eval_knn->add_option("test", test_codes, "labeled test code file")->required();
    eval_knn->add_option("-k", knn_k, "neighbor count")->check(CLI::PositiveNumber)
        ->capture_default_str();

    // correlation
    auto* correlation = app.add_subcommand("correlation", "average absolute dimension correlation");
    correlation->add_option("payload", in_path, "embedding or code file")->required();

    // memreport
    std::uint64_t mr_n = 0, mr_d = 0, mr_b = 0;
    auto* memreport = app.add_subcommand("memreport", "memory footprint of original vs codes");
    memreport->add_option("n", mr_n, "record count")->required()->check(CLI::PositiveNumber);
    memreport->add_option("d", mr_d, "embedding dimension")->required()->check(CLI::PositiveNumber);
    memreport->add_option("bits", mr_b, "code length")->required()->check(CLI::PositiveNumber);

    // export-bitmap
    std::string label_filter;
    std::size_t sample = 0;
    auto* bitmap = app.add_subcommand("export-bitmap", "render codes as a PBM image, one row per code");
    bitmap->add_option("codes", in_path, "code file")->required();
    bitmap->add_option("-o,--output", out_path, "output PBM file")->required();
    bitmap->add_option("--label", label_filter, "keep only codes with this label");
    bitmap->add_option("--sample", sample, "random sample size (0 = all, seeded)");

    // gen-synthetic
    std::string kind;
    std::size_t gs_d = 32, gs_bits = 8, gs_n = 512, gs_clusters = 2, gs_factors = 8, test_n = 0;
    double gs_flip = 0.05, gs_noise = 0.05;
    auto* gen = app.add_subcommand("gen-synthetic", "generate seeded synthetic fixtures");
    gen->add_option("--kind", kind, "planted | clusters | factors")
        ->required()
        ->check(CLI::IsMember({"planted", "clusters", "factors"}));
    gen->add_option("-o,--output", out_path, "output file")->required();
    gen->add_option("--d", gs_d, "embedding dimension")->capture_default_str();
    gen->add_option("--bits", gs_bits, "code length")->capture_default_str();
    gen->add_option("--n", gs_n, "record count")->capture_default_str();
    gen->add_option("--clusters", gs_clusters, "cluster count")->capture_default_str();
    gen->add_option("--flip", gs_flip, "per-bit flip probability")->capture_default_str();
    gen->add_option("--factors", gs_factors, "independent factor count")->capture_default_str();
    gen->add_option("--noise", gs_noise, "additive noise scale")->capture_default_str();
    gen->add_option("--test-out", test_out, "write the last --test-n records here (clusters)");
    gen->add_option("--test-n", test_n, "held-out record count for --test-out");

    // global flags are accepted after the subcommand name too
    for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return cmd_train(g, in_path, out_path, bits, cfg, tau_final, tf->count() > 0);
        if (encode->parsed()) return cmd_encode(g, model_path, in_path, out_path, report_loss);
        if (baseline->parsed()) return cmd_baseline(g, in_path, out_path, thresholds_path);
        if (search->parsed()) {
            if (query_id.empty() && query_hex.empty())
                throw std::runtime_error("search: one of --id or --hex is required");
            return cmd_search(g, in_path, query_id, query_hex, k);
        }
        if (eval_sim->parsed()) return cmd_eval_sim(g, in_path, pairs_path, metric);
        if (eval_knn->parsed()) return cmd_eval_knn(g, train_codes, test_codes, knn_k);
        if (correlation->parsed()) return cmd_correlation(g, in_path);
        if (memreport->parsed()) return cmd_memreport(g, mr_n, mr_d, mr_b);
        if (bitmap->parsed()) return cmd_export_bitmap(g, in_path, out_path, label_filter, sample);
        if (gen->parsed())
            return cmd_gen_synthetic(g, kind, out_path, gs_d, gs_bits, gs_n, gs_clusters, gs_flip,
                                     gs_factors, gs_noise, test_out, test_n);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
