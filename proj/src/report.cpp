#include "gnnie/report.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace gnnie {

namespace {

nlohmann::ordered_json plan_to_json(const WeightingPlan& p) {
    nlohmann::ordered_json j;
    j["block_elems"] = p.block_elems;
    j["blocks_per_vertex"] = p.blocks_per_vertex;
    j["set_vertices"] = p.set_vertices;
    j["num_sets"] = p.num_sets;
    j["num_passes"] = p.num_passes;
    return j;
}

WeightingPlan plan_from_json(const nlohmann::ordered_json& j) {
    WeightingPlan p;
    p.block_elems = j.at("block_elems").get<uint32_t>();
    p.blocks_per_vertex = j.at("blocks_per_vertex").get<uint32_t>();
    p.set_vertices = j.at("set_vertices").get<uint32_t>();
    p.num_sets = j.at("num_sets").get<uint32_t>();
    p.num_passes = j.at("num_passes").get<uint32_t>();
    return p;
}

}  // namespace

nlohmann::ordered_json LayerReport::to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["kind"] = kind;
    j["f_in"] = f_in;
    j["f_out"] = f_out;
    j["plan"] = plan_to_json(plan);
    j["phases"] = nlohmann::ordered_json::array();
    for (const auto& p : phases) j["phases"].push_back(p.to_json());
    j["row_cycles"] = row_cycles;
    j["alpha_histograms"] = nlohmann::ordered_json::array();
    for (const auto& h : alpha_histograms) {
        nlohmann::ordered_json hj;
        hj["round"] = h.round;
        hj["bins"] = nlohmann::ordered_json::array();
        for (const auto& [a, f] : h.bins) hj["bins"].push_back({a, f});
        j["alpha_histograms"].push_back(hj);
    }
    j["rounds"] = rounds;
    j["iterations"] = iterations;
    j["gamma_escalations"] = gamma_escalations;
    j["initial_alpha_sum"] = initial_alpha_sum;
    j["alpha_decrements"] = alpha_decrements;
    j["deadlocked"] = deadlocked;
    j["verify_max_rel_err"] = verify_max_rel_err;
    return j;
}

LayerReport LayerReport::from_json(const nlohmann::ordered_json& j) {
    LayerReport r;
    r.name = j.at("name").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.f_in = j.at("f_in").get<uint32_t>();
    r.f_out = j.at("f_out").get<uint32_t>();
    r.plan = plan_from_json(j.at("plan"));
    for (const auto& p : j.at("phases")) r.phases.push_back(PhaseStats::from_json(p));
    r.row_cycles = j.at("row_cycles").get<std::vector<uint64_t>>();
    for (const auto& hj : j.at("alpha_histograms")) {
        AlphaHistogram h;
        h.round = hj.at("round").get<uint32_t>();
        for (const auto& b : hj.at("bins"))
            h.bins.emplace_back(b.at(0).get<uint32_t>(), b.at(1).get<uint64_t>());
        r.alpha_histograms.push_back(std::move(h));
    }
    r.rounds = j.at("rounds").get<uint32_t>();
    r.iterations = j.at("iterations").get<uint64_t>();
    r.gamma_escalations = j.at("gamma_escalations").get<uint32_t>();
    r.initial_alpha_sum = j.at("initial_alpha_sum").get<uint64_t>();
    r.alpha_decrements = j.at("alpha_decrements").get<uint64_t>();
    r.deadlocked = j.at("deadlocked").get<bool>();
    r.verify_max_rel_err = j.at("verify_max_rel_err").get<double>();
    return r;
}

nlohmann::ordered_json RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = schema;
    j["model"] = model;
    j["design"] = design;
    j["seed"] = seed;
    j["config"] = config_echo;
    j["options"] = options_echo;
    j["dataset"] = dataset;
    j["layers"] = nlohmann::ordered_json::array();
    for (const auto& l : layers) j["layers"].push_back(l.to_json());
    j["energy"] = energy.to_json();
    j["total_cycles"] = total_cycles;
    j["total_mac_ops"] = total_mac_ops;
    j["achieved_tops"] = achieved_tops;
    j["peak_tops"] = peak_tops;
    j["verify_passed"] = verify_passed;
    j["deadlocked"] = deadlocked;
    j["dram_bytes_read"] = dram_bytes_read;
    j["dram_bytes_written"] = dram_bytes_written;
    return j;
}

RunReport RunReport::from_json(const nlohmann::ordered_json& j) {
    RunReport r;
    r.schema = j.at("schema").get<std::string>();
    if (r.schema != "gnnie-sim/1")
        throw std::runtime_error("report: unsupported schema " + r.schema);
    r.model = j.at("model").get<std::string>();
    r.design = j.at("design").get<std::string>();
    r.seed = j.at("seed").get<uint64_t>();
    r.config_echo = j.at("config");
    r.options_echo = j.at("options");
    r.dataset = j.at("dataset");
    for (const auto& l : j.at("layers")) r.layers.push_back(LayerReport::from_json(l));
    r.energy = EnergyReport::from_json(j.at("energy"));
    r.total_cycles = j.at("total_cycles").get<uint64_t>();
    r.total_mac_ops = j.at("total_mac_ops").get<uint64_t>();
    r.achieved_tops = j.at("achieved_tops").get<double>();
    r.peak_tops = j.at("peak_tops").get<double>();
    r.verify_passed = j.at("verify_passed").get<bool>();
    r.deadlocked = j.at("deadlocked").get<bool>();
    r.dram_bytes_read = j.at("dram_bytes_read").get<uint64_t>();
    r.dram_bytes_written = j.at("dram_bytes_written").get<uint64_t>();
    return r;
}

double beta(uint64_t base_cycles, uint64_t base_macs, uint64_t design_cycles,
            uint64_t design_macs) {
    if (design_macs <= base_macs)
        throw std::invalid_argument("beta: design must add MACs over the baseline");
    double gain = static_cast<double>(base_cycles) - static_cast<double>(design_cycles);
    return gain / static_cast<double>(design_macs - base_macs);
}

void write_row_workload_csv(const RunReport& r, std::ostream& out) {
    out << "row,cycles,design\n";
    for (const auto& layer : r.layers) {
        for (size_t row = 0; row < layer.row_cycles.size(); ++row)
            out << row << ',' << layer.row_cycles[row] << ',' << r.design << '\n';
    }
}

void write_alpha_histogram_csv(const RunReport& r, std::ostream& out) {
    out << "round,alpha,frequency\n";
    for (const auto& layer : r.layers)
        for (const auto& h : layer.alpha_histograms)
            for (const auto& [a, f] : h.bins) out << h.round << ',' << a << ',' << f << '\n';
}

std::vector<std::string> emit_report(const RunReport& r, const std::string& out_dir,
                                     EmitFormat format) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> files;
    auto write_file = [&](const std::string& name, auto&& writer) {
        std::string path = (fs::path(out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        writer(out);
        files.push_back(path);
    };
    write_file("report.json", [&](std::ostream& out) { out << r.dump(); });
    if (format == EmitFormat::csv_bundle) {
        write_file("row_workload.csv",
                   [&](std::ostream& out) { write_row_workload_csv(r, out); });
        write_file("alpha_histogram.csv",
                   [&](std::ostream& out) { write_alpha_histogram_csv(r, out); });
        write_file("dram_trace.csv", [&](std::ostream& out) { r.trace.write_csv(out); });
    }
    return files;
}

RunReport parse_report(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open report: " + json_path);
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(in);
    return RunReport::from_json(j);
}

}  // namespace gnnie
