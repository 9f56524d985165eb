// Command-line front end: register / warp / eval / landscape / synth /
// features. Exit codes: 0 ok, 2 flag errors, 3 I/O errors, 4 engine errors.

#include "cvreg/io.hpp"
#include "cvreg/kernels.hpp"
#include "cvreg/landscape.hpp"
#include "cvreg/metrics.hpp"
#include "cvreg/parallel.hpp"
#include "cvreg/pyramid.hpp"
#include "cvreg/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using json = nlohmann::ordered_json;

namespace {

std::vector<int> parse_int_list(const std::string& s, const std::string& flag)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (...) {
            throw CLI::ValidationError(flag, "expected a comma-separated integer list");
        }
    }
    if (out.empty())
        throw CLI::ValidationError(flag, "empty list");
    return out;
}

std::vector<float> parse_float_list(const std::string& s, const std::string& flag)
{
    std::vector<float> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stof(item));
        } catch (...) {
            throw CLI::ValidationError(flag, "expected a comma-separated number list");
        }
    }
    if (out.empty())
        throw CLI::ValidationError(flag, "empty list");
    return out;
}

cvreg::IVec3 parse_dims(const std::string& s, const std::string& flag)
{
    const auto v = parse_int_list(s, flag);
    if (v.size() != 3)
        throw CLI::ValidationError(flag, "expected three comma-separated values");
    return {v[0], v[1], v[2]};
}

// "FIXED" or "FIXED,MOVING"
std::pair<std::string, std::string> parse_path_pair(const std::string& s)
{
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        return {s, ""};
    return {s.substr(0, comma), s.substr(comma + 1)};
}

json dims_json(cvreg::IVec3 d)
{
    return json::array({d.x, d.y, d.z});
}

void write_json(const std::string& path, const json& j)
{
    std::ofstream f(path);
    if (!f)
        throw cvreg::io::IoError(cvreg::io::IoCode::WriteFailed, path + ": cannot open for writing");
    f << j.dump(2) << "\n";
}

cvreg::ProviderType provider_or_flag_error(const std::string& name)
{
    try {
        return cvreg::provider_from_name(name);
    } catch (const cvreg::Error& e) {
        throw CLI::ValidationError("--provider", e.what());
    }
}

struct RegisterArgs {
    std::string fixed, moving, out_field, out_warped, report;
    int levels = 3;
    std::string radii = "2,3,3";
    std::string provider = "ssd-descriptor";
    std::string embedding_local, embedding_global;
    std::string instance_opt = "on";
    float lr = 0.05f;
    int iters = 50;
    float lambda = 0.1f;
    std::string schedule = "0.003,0.01,0.03,0.1,0.3,1";
    int kernel = 3;
};

void run_register(const RegisterArgs& a)
{
    cvreg::PyramidConfig cfg;
    cfg.levels = a.levels;
    cfg.radii = parse_int_list(a.radii, "--radii");
    if (int(cfg.radii.size()) != cfg.levels)
        throw CLI::ValidationError("--radii", "length must equal --levels");
    cfg.solver.coupling_schedule = parse_float_list(a.schedule, "--schedule");
    cfg.solver.smooth_kernel = a.kernel;
    cfg.provider.provider = provider_or_flag_error(a.provider);
    std::tie(cfg.provider.local_path, cfg.provider.moving_local_path) =
        parse_path_pair(a.embedding_local);
    std::tie(cfg.provider.global_path, cfg.provider.moving_global_path) =
        parse_path_pair(a.embedding_global);
    cfg.run_instance_opt = a.instance_opt == "on";
    cfg.instance.learning_rate = a.lr;
    cfg.instance.iterations = a.iters;
    cfg.instance.lambda_diffusion = a.lambda;

    const cvreg::Volume fixed = cvreg::io::read_volume(a.fixed);
    const cvreg::Volume moving = cvreg::io::read_volume(a.moving);

    const cvreg::RegistrationResult res = cvreg::register_volumes(fixed, moving, cfg);

    if (!a.out_field.empty())
        cvreg::io::write_volume(a.out_field, res.field.volume());
    if (!a.out_warped.empty())
        cvreg::io::write_volume(a.out_warped, warp(moving, res.field));

    json report;
    report["command"] = "register";
    json jc;
    jc["fixed"] = a.fixed;
    jc["moving"] = a.moving;
    jc["levels"] = cfg.levels;
    jc["radii"] = cfg.radii;
    jc["schedule"] = cfg.solver.coupling_schedule;
    jc["kernel"] = cfg.solver.smooth_kernel;
    jc["passes"] = cfg.solver.smooth_passes;
    jc["provider"] = cvreg::provider_name(cfg.provider.provider);
    if (cfg.provider.provider == cvreg::ProviderType::SsdDescriptor) {
        jc["patch_radius"] = cfg.provider.patch_radius;
        jc["eps"] = cfg.provider.eps;
    }
    if (cfg.provider.provider == cvreg::ProviderType::Embedded) {
        jc["embedding_local"] = a.embedding_local;
        jc["embedding_global"] = a.embedding_global;
    }
    jc["instance_opt"] = cfg.run_instance_opt ? "on" : "off";
    jc["lr"] = cfg.instance.learning_rate;
    jc["iters"] = cfg.instance.iterations;
    jc["lambda"] = cfg.instance.lambda_diffusion;
    report["config"] = jc;
    report["effective_capture_radius_voxels"] = res.capture_radius_voxels;

    json jlevels = json::array();
    for (const auto& lv : res.levels) {
        json jl;
        jl["level"] = lv.level;
        jl["image_dims"] = dims_json(lv.image_dims);
        jl["feature_dims"] = dims_json(lv.feature_dims);
        jl["radius"] = lv.radius;
        jl["coupling_gaps"] = lv.coupling_gaps;
        jl["delta_max_abs"] = lv.delta_max_abs;
        jlevels.push_back(std::move(jl));
    }
    report["levels"] = jlevels;
    report["instance_loss_trace"] = res.instance_loss_trace;
    report["field_max_abs_voxels"] = res.field_max_abs;

    // Execution details live apart from the registration output so that
    // runs with different worker counts produce identical reports otherwise.
    json rt;
    rt["threads"] = cvreg::max_threads();
    rt["simd"] = cvreg::kern::ops().name;
    rt["total_seconds"] = res.total_seconds;
    rt["instance_seconds"] = res.instance_seconds;
    json lsec = json::array();
    for (const auto& lv : res.levels)
        lsec.push_back(lv.seconds);
    rt["level_seconds"] = lsec;
    report["runtime"] = rt;

    if (!a.report.empty())
        write_json(a.report, report);

    std::cout << "registered " << fixed.dims().x << "x" << fixed.dims().y << "x"
              << fixed.dims().z << " pair in " << res.total_seconds
              << " s (capture radius " << res.capture_radius_voxels << " vox, max |u| "
              << res.field_max_abs << " vox)\n";
}

struct WarpArgs {
    std::string in, field, out;
    bool label = false;
};

void run_warp(const WarpArgs& a)
{
    const cvreg::Volume vol = cvreg::io::read_volume(a.in);
    if (a.label && vol.kind() != cvreg::Kind::LabelMap)
        throw CLI::ValidationError("--label", "input volume is not a label map");
    const cvreg::DisplacementField field(cvreg::io::read_volume(a.field));
    cvreg::io::write_volume(a.out, warp(vol, field));
    std::cout << "warped " << a.in << " -> " << a.out << "\n";
}

struct EvalArgs {
    std::string labels_a, labels_b, field, labels, report;
};

void run_eval(const EvalArgs& a)
{
    const cvreg::Volume la = cvreg::io::read_volume(a.labels_a);
    const cvreg::Volume lb = cvreg::io::read_volume(a.labels_b);
    std::vector<int> label_set = a.labels.empty() ? cvreg::labels_present(la, lb)
                                                  : parse_int_list(a.labels, "--labels");
    if (label_set.empty())
        throw cvreg::Error("eval: no nonzero labels present in either map");

    json out;
    out["command"] = "eval";
    json per;
    for (int label : label_set)
        per[std::to_string(label)] = cvreg::dice(la, lb, label);
    out["per_label_dice"] = per;
    out["mean_dice"] = cvreg::mean_dice(la, lb, label_set);
    if (!a.field.empty()) {
        const cvreg::DisplacementField field(cvreg::io::read_volume(a.field));
        out["sdlogj"] = cvreg::sd_log_j(field);
    }
    std::cout << out.dump(2) << "\n";
    if (!a.report.empty())
        write_json(a.report, out);
}

struct LandscapeArgs {
    std::string image, provider = "intensity", axes = "0,1", out_csv;
    std::string embedding_local, embedding_global;
    float range = 60.0f, step = 5.0f;
    bool foreground_mask = false;
};

void run_landscape(const LandscapeArgs& a)
{
    const auto axes = parse_int_list(a.axes, "--axes");
    if (axes.size() != 2 || axes[0] < 0 || axes[0] > 2 || axes[1] < 0 || axes[1] > 2 ||
        axes[0] == axes[1])
        throw CLI::ValidationError("--axes", "expected two distinct axes in {0,1,2}");

    cvreg::FeatureProviderConfig pc;
    pc.provider = provider_or_flag_error(a.provider);
    pc.local_path = a.embedding_local;
    pc.global_path = a.embedding_global;
    const cvreg::FeatureProvider provider(pc);

    cvreg::LandscapeConfig lc;
    lc.axis_i = axes[0];
    lc.axis_j = axes[1];
    lc.range_deg = a.range;
    lc.step_deg = a.step;
    lc.foreground_mask = a.foreground_mask;

    const cvreg::Volume image = cvreg::io::read_volume(a.image);
    const cvreg::LandscapeGrid grid = rotation_landscape(image, provider, lc);
    cvreg::write_landscape_csv(grid, a.out_csv);
    std::cout << "landscape: " << grid.angles.size() << "x" << grid.angles.size()
              << " cells -> " << a.out_csv << "\n";
}

struct SynthArgs {
    std::string dims = "96,96,96", out_prefix;
    std::uint64_t seed = 1;
    float magnitude = 8.0f, sigma = 8.0f;
};

void run_synth(const SynthArgs& a)
{
    const cvreg::IVec3 dims = parse_dims(a.dims, "--dims");
    const cvreg::Phantom ph = cvreg::make_phantom(dims, a.seed);
    const cvreg::DisplacementField field =
        cvreg::make_smooth_field(dims, a.magnitude, a.sigma, a.seed + 0x9e3779b9ull);

    cvreg::io::write_volume(a.out_prefix + "_image.cvr", ph.image);
    cvreg::io::write_volume(a.out_prefix + "_labels.cvr", ph.labels);
    cvreg::io::write_volume(a.out_prefix + "_field.cvr", field.volume());

    float max_norm = 0.0f;
    const cvreg::IVec3 fd = field.dims();
    for (int x = 0; x < fd.x; ++x)
        for (int y = 0; y < fd.y; ++y)
            for (int z = 0; z < fd.z; ++z)
                max_norm = std::max(max_norm, field.at(x, y, z).norm());
    std::cout << "synth: " << a.out_prefix << "_{image,labels,field}.cvr (organs "
              << ph.organ_count << ", field max norm " << max_norm << " vox)\n";
}

struct FeaturesArgs {
    std::string in, provider = "ssd-descriptor", out;
    std::string embedding_local, embedding_global;
    int patch_radius = 1;
};

void run_features(const FeaturesArgs& a)
{
    cvreg::FeatureProviderConfig pc;
    pc.provider = provider_or_flag_error(a.provider);
    pc.patch_radius = a.patch_radius;
    pc.local_path = a.embedding_local;
    pc.global_path = a.embedding_global;
    const cvreg::FeatureProvider provider(pc);

    cvreg::FeatureVolume f;
    if (provider.reextracts()) {
        if (a.in.empty())
            throw CLI::ValidationError("--in", "required for re-extracting providers");
        f = provider.extract(cvreg::io::read_volume(a.in));
    } else {
        f = provider.load_fused();
    }
    cvreg::io::write_volume(a.out, f.vol);
    std::cout << "features: " << f.vol.channels() << " channels on "
              << f.vol.dims().x << "x" << f.vol.dims().y << "x" << f.vol.dims().z
              << " -> " << a.out << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cost-volume deformable registration toolkit"};
    app.require_subcommand(1);

    int threads = 0;
    bool no_simd = false;
    app.add_option("--threads", threads, "worker thread cap (0 = machine parallelism)");
    app.add_flag("--no-simd", no_simd, "force the scalar reference kernels");

    // Subcommand callbacks fire after the full parse, so the globals are set.
    auto apply_globals = [&] {
        cvreg::set_max_threads(threads);
        if (no_simd)
            cvreg::kern::select_ops(cvreg::kern::scalar_ops());
    };

    RegisterArgs ra;
    auto* reg = app.add_subcommand("register", "deformable registration of a volume pair");
    reg->add_option("--fixed", ra.fixed)->required();
    reg->add_option("--moving", ra.moving)->required();
    reg->add_option("--out-field", ra.out_field);
    reg->add_option("--out-warped", ra.out_warped);
    reg->add_option("--levels", ra.levels);
    reg->add_option("--radii", ra.radii, "per-level search radii, coarse to fine");
    reg->add_option("--provider", ra.provider, "intensity | ssd-descriptor | embedded");
    reg->add_option("--embedding-local", ra.embedding_local, "FIXED[,MOVING] paths");
    reg->add_option("--embedding-global", ra.embedding_global, "FIXED[,MOVING] paths");
    reg->add_option("--instance-opt", ra.instance_opt)->check(CLI::IsMember({"on", "off"}));
    reg->add_option("--lr", ra.lr);
    reg->add_option("--iters", ra.iters);
    reg->add_option("--lambda", ra.lambda);
    reg->add_option("--schedule", ra.schedule, "coupling weights 1/(2*theta)");
    reg->add_option("--kernel", ra.kernel, "smoothing kernel size (odd)");
    reg->add_option("--report", ra.report, "JSON run report path");
    reg->callback([&] { apply_globals(); run_register(ra); });

    WarpArgs wa;
    auto* wr = app.add_subcommand("warp", "apply a stored displacement field");
    wr->add_option("--in", wa.in)->required();
    wr->add_option("--field", wa.field)->required();
    wr->add_option("--out", wa.out)->required();
    wr->add_flag("--label", wa.label, "assert label-map input (nearest-neighbor)");
    wr->callback([&] { apply_globals(); run_warp(wa); });

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "Dice and SDlogJ metrics");
    ev->add_option("--labels-a", ea.labels_a)->required();
    ev->add_option("--labels-b", ea.labels_b)->required();
    ev->add_option("--field", ea.field);
    ev->add_option("--labels", ea.labels, "label set (default: labels present)");
    ev->add_option("--report", ea.report);
    ev->callback([&] { apply_globals(); run_eval(ea); });

    LandscapeArgs la;
    auto* ls = app.add_subcommand("landscape", "rotation similarity landscape");
    ls->add_option("--image", la.image)->required();
    ls->add_option("--provider", la.provider);
    ls->add_option("--axes", la.axes);
    ls->add_option("--range", la.range, "degrees, sweep is [-range, range]");
    ls->add_option("--step", la.step);
    ls->add_option("--out-csv", la.out_csv)->required();
    ls->add_option("--embedding-local", la.embedding_local);
    ls->add_option("--embedding-global", la.embedding_global);
    ls->add_flag("--foreground-mask", la.foreground_mask);
    ls->callback([&] { apply_globals(); run_landscape(la); });

    SynthArgs sa;
    auto* sy = app.add_subcommand("synth", "phantom + ground-truth field generator");
    sy->add_option("--dims", sa.dims);
    sy->add_option("--seed", sa.seed);
    sy->add_option("--magnitude", sa.magnitude, "max displacement norm, voxels");
    sy->add_option("--sigma", sa.sigma, "field smoothness, voxels");
    sy->add_option("--out-prefix", sa.out_prefix)->required();
    sy->callback([&] { apply_globals(); run_synth(sa); });

    FeaturesArgs fa;
    auto* fe = app.add_subcommand("features", "extract and store a feature volume");
    fe->add_option("--in", fa.in);
    fe->add_option("--provider", fa.provider);
    fe->add_option("--out", fa.out)->required();
    fe->add_option("--embedding-local", fa.embedding_local);
    fe->add_option("--embedding-global", fa.embedding_global);
    fe->add_option("--patch-radius", fa.patch_radius);
    fe->callback([&] { apply_globals(); run_features(fa); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const cvreg::io::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const cvreg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
