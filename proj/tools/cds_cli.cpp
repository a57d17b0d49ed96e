// Command-line front end.
//
//   cds extract  --graph FILE --seeds 5,8 [--one-based] [--dynamics D] [--margin M] [--json]
//   cds segment  --image IMG --annotation JSON --out MASK.png [pipeline flags] [--looseness L]
//   cds serve    [--host H] [--port P]           (port also from CDS_PORT)
//   cds eval     --out DIR [pipeline flags] [--seed S]
//   cds fixtures --out DIR
//
// Exit codes: 0 success, 1 bad input or usage, 2 solver abort.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cds/error.hpp"
#include "cds/extraction.hpp"
#include "cds/graph_io.hpp"
#include "cds/protocols.hpp"
#include "cds/segmentation.hpp"
#include "cds/service.hpp"

// Last: it pulls in <resolv.h>, whose _res macro breaks Eigen templates.
#include <httplib.h>

namespace {

using namespace cds;
using namespace cds::seg;

constexpr int kExitInput = 1;
constexpr int kExitAbort = 2;

struct PipelineFlags {
    std::string sigma_mode = "single";
    double sigma = SigmaStrategy{}.value;
    int knn_k = 7;
    int superpixels = PipelineSettings{}.superpixels;
    double margin = ExtractionSettings{}.margin;
    std::string dynamics = "replicator";

    void add(CLI::App& app) {
        app.add_option("--sigma-mode", sigma_mode, "single, self-tuning or best (eval only)")
            ->check(CLI::IsMember({"single", "self-tuning", "best"}));
        app.add_option("--sigma", sigma, "kernel width for single mode");
        app.add_option("--knn-k", knn_k, "neighbours for self-tuning");
        app.add_option("--superpixels", superpixels, "requested superpixel count");
        app.add_option("--margin", margin, "alpha = (1 + margin) * spectral bound");
        app.add_option("--dynamics", dynamics)->check(CLI::IsMember({"replicator", "pairwise"}));
    }

    [[nodiscard]] PipelineSettings settings() const {
        PipelineSettings s;
        s.sigma.mode = parse_sigma_mode(sigma_mode);
        s.sigma.value = sigma;
        s.sigma.knn_k = knn_k;
        s.superpixels = superpixels;
        s.extraction.margin = margin;
        s.extraction.dynamics = parse_dynamics(dynamics);
        s.validate();
        return s;
    }
};

std::vector<Vertex> parse_seeds(const std::string& text, int offset) {
    std::vector<Vertex> seeds;
    std::stringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        if (token.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(token, &used);
        } catch (const std::exception&) {
            throw InvalidArgument("seed '" + token + "' is not an integer");
        }
        if (token.find_first_not_of(" \t", used) != std::string::npos) {
            throw InvalidArgument("seed '" + token + "' is not an integer");
        }
        seeds.push_back(v - offset);
    }
    if (seeds.empty()) throw InvalidArgument("--seeds needs at least one vertex");
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    for (Vertex v : seeds)
        if (v < 0) throw InvalidArgument("seed " + std::to_string(v + offset) + " is out of range");
    return seeds;
}

nlohmann::ordered_json cluster_json(const ExtractedCluster& c, int offset) {
    auto shift = [offset](const VertexSet& s) {
        std::vector<int> out;
        for (Vertex v : s) out.push_back(v + offset);
        return out;
    };
    nlohmann::ordered_json j;
    j["support"] = shift(c.support);
    j["active_constraints"] = shift(c.active_constraints);
    j["alpha"] = c.alpha;
    j["spectral_bound"] = c.bound.value;
    j["objective"] = c.objective;
    j["kkt_residual"] = c.kkt_residual;
    j["iterations"] = c.iterations;
    j["refinement_iterations"] = c.refinement_iterations;
    j["converged"] = c.converged;
    return j;
}

void print_extraction(const ExtractionResult& r, int offset, bool as_json) {
    if (as_json) {
        nlohmann::ordered_json doc;
        doc["clusters"] = nlohmann::ordered_json::array();
        for (const auto& c : r.clusters) doc["clusters"].push_back(cluster_json(c, offset));
        std::vector<int> uni;
        for (Vertex v : r.union_of_supports) uni.push_back(v + offset);
        doc["union"] = uni;
        std::cout << doc.dump(2) << '\n';
        return;
    }
    for (std::size_t k = 0; k < r.clusters.size(); ++k) {
        const auto& c = r.clusters[k];
        std::cout << "cluster " << k + 1 << ": " << c.support.to_string(offset) << "  S=" << c.active_constraints.to_string(offset)
                  << "  alpha=" << c.alpha << "  bound=" << c.bound.value << "  objective=" << c.objective
                  << "  kkt=" << c.kkt_residual << "  iterations=" << c.iterations << "+" << c.refinement_iterations
                  << (c.converged ? "" : "  (not converged)") << '\n';
    }
    std::cout << "union: " << r.union_of_supports.to_string(offset) << '\n';
}

int run_extract(const std::string& graph_path, const std::string& seeds_text, bool one_based,
                const std::string& dynamics, double margin, bool as_json) {
    const int offset = one_based ? 1 : 0;
    const AffinityMatrix a = load_graph_file(graph_path);
    const VertexSet seeds(parse_seeds(seeds_text, offset));
    seeds.check_bounds(a.size());
    ExtractionSettings settings;
    settings.dynamics = parse_dynamics(dynamics);
    settings.margin = margin;
    try {
        print_extraction(extract_constrained_clusters(a, ConstraintSet(seeds), settings), offset, as_json);
    } catch (const ExtractionAborted& e) {
        std::cerr << "solver aborted: " << e.what() << '\n';
        print_extraction(e.partial(), offset, as_json);
        return kExitAbort;
    } catch (const DegenerateStateError& e) {
        std::cerr << "solver aborted: " << e.what() << '\n';
        return kExitAbort;
    }
    return 0;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::filesystem::path diagnostics_path(const std::filesystem::path& mask) {
    std::filesystem::path p = mask;
    p.replace_extension(".diagnostics.json");
    return p;
}

int run_segment(const std::string& image_path, const std::string& annotation_path, const std::string& out,
                const PipelineFlags& flags, const std::optional<double>& looseness) {
    PipelineSettings settings = flags.settings();
    if (settings.sigma.mode == SigmaMode::kBest) {
        throw InvalidArgument("--sigma-mode best needs ground truth; use it with 'eval'");
    }
    Annotation annotation = parse_annotation(read_text(annotation_path));
    if (looseness) {
        if (!is_box_kind(annotation.kind)) throw InvalidArgument("--looseness only applies to box annotations");
        annotation.kind = *looseness > 0.0 ? AnnotationKind::kLooseBox : AnnotationKind::kBoundingBox;
        annotation.looseness_percent = *looseness;
        annotation.validate();
    }
    const Image image = load_image(image_path);
    SegmentationResult result;
    try {
        result = segment(image, annotation, settings);
    } catch (const ExtractionAborted& e) {
        std::cerr << "solver aborted: " << e.what() << '\n';
        return kExitAbort;
    }
    save_mask_png(out, result.mask);
    write_text(diagnostics_path(out), diagnostics_json(result).dump(2) + "\n");
    std::cout << "mask: " << out << "  foreground pixels: " << result.mask.count()
              << "  clusters: " << result.extraction.clusters.size() << '\n';
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
}

int run_serve(const std::string& host, int port, const PipelineFlags& flags) {
    SegmentationService service(flags.settings());
    httplib::Server server;
    service.mount(server);
    std::cout << "listening on http://" << host << ':' << port << std::endl;
    if (!server.listen(host, port)) {
        std::cerr << "cannot listen on " << host << ':' << port << '\n';
        return kExitInput;
    }
    return 0;
}

int run_eval(const std::string& out_dir, const PipelineFlags& flags, std::uint64_t seed) {
    const PipelineSettings settings = flags.settings();
    const auto fixtures = make_fixtures();
    ScribbleProtocol protocol;
    protocol.seed = seed;
    const auto scribbles = run_scribble_suite(fixtures, settings);
    const auto looseness = run_looseness_sweep(fixtures, {0.0, 120.0, 240.0, 600.0}, settings);
    const auto errors = run_scribble_error_sweep(fixtures, protocol, settings);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text(dir / "scribble.csv", to_csv(scribbles));
    write_text(dir / "looseness.csv", to_csv(looseness));
    write_text(dir / "scribble_errors.csv", to_csv(errors));
    const auto summary = summary_json(looseness, errors, scribbles);
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained dominant-set clustering and interactive segmentation"};
    app.require_subcommand(1);

    auto* extract = app.add_subcommand("extract", "peel constrained clusters off a graph file");
    std::string graph_path;
    std::string seeds;
    bool one_based = false;
    bool as_json = false;
    std::string dynamics = "replicator";
    double margin = ExtractionSettings{}.margin;
    extract->add_option("--graph", graph_path, "graph file: 'n m' then 'u v [w]' lines, 0-based")->required();
    extract->add_option("--seeds", seeds, "comma-separated constraint vertices")->required();
    extract->add_flag("--one-based", one_based, "seeds and output use 1-based vertex ids");
    extract->add_option("--dynamics", dynamics)->check(CLI::IsMember({"replicator", "pairwise"}));
    extract->add_option("--margin", margin, "alpha = (1 + margin) * spectral bound");
    extract->add_flag("--json", as_json, "JSON report");

    auto* seg_cmd = app.add_subcommand("segment", "segment one image from an annotation file");
    std::string image_path;
    std::string annotation_path;
    std::string out_path;
    std::optional<double> looseness;
    PipelineFlags seg_flags;
    seg_cmd->add_option("--image", image_path)->required();
    seg_cmd->add_option("--annotation", annotation_path)->required();
    seg_cmd->add_option("--out", out_path, "mask PNG; diagnostics go to <stem>.diagnostics.json")->required();
    seg_cmd->add_option("--looseness", looseness, "dilate a box annotation by this area percentage");
    seg_flags.add(*seg_cmd);

    auto* serve = app.add_subcommand("serve", "HTTP service for the annotation UI");
    std::string host = "127.0.0.1";
    int port = 8080;
    if (const char* env = std::getenv("CDS_PORT")) port = std::atoi(env);
    PipelineFlags serve_flags;
    serve->add_option("--host", host);
    serve->add_option("--port", port, "defaults to $CDS_PORT or 8080");
    serve_flags.add(*serve);

    auto* eval = app.add_subcommand("eval", "fixture suites: scribble, loose box, scribble errors");
    std::string eval_dir;
    std::uint64_t seed = 1;
    PipelineFlags eval_flags;
    eval->add_option("--out", eval_dir, "directory for CSV reports and summary.json")->required();
    eval->add_option("--seed", seed, "synthetic scribble seed");
    eval_flags.add(*eval);

    auto* fixtures = app.add_subcommand("fixtures", "write the synthetic fixture images");
    std::string fixture_dir;
    fixtures->add_option("--out", fixture_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*extract) return run_extract(graph_path, seeds, one_based, dynamics, margin, as_json);
        if (*seg_cmd) return run_segment(image_path, annotation_path, out_path, seg_flags, looseness);
        if (*serve) return run_serve(host, port, serve_flags);
        if (*eval) return run_eval(eval_dir, eval_flags, seed);
        if (*fixtures) {
            const auto all = make_fixtures();
            write_fixtures(fixture_dir, all);
            std::cout << "wrote " << all.size() << " fixtures to " << fixture_dir << '\n';
            return 0;
        }
    } catch (const cds::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return 0;
}
