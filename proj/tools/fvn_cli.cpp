// fvn — command-line front end over the shared C API (include/fvn/fvn.h).
// This program links only the C interface; all model, corpus, and metric
// logic lives behind it.
//
// Commands: prepare, train, build-codes, generate, evaluate, inspect-codes,
// selftest. Every successful command writes a reproducibility manifest
// (<command>.manifest.json) next to its primary output. Errors are a single
// machine-parsable line on stderr: "error: <category>: <message>".

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fvn/fvn.h"

namespace {

namespace fs = std::filesystem;

constexpr const char* kUsage =
    "usage: fvn <command> [arguments] [flags]\n"
    "\n"
    "commands:\n"
    "  prepare <train_csv> [test_csv]    load, delexicalize, and tokenize a corpus\n"
    "  train                             train a model (--config required)\n"
    "  build-codes                       build code tables over the training corpus\n"
    "  generate <conditions_csv>         generate one text per condition row\n"
    "  evaluate <hyp> <ref> [cmr_csv]    score hypotheses against references\n"
    "  inspect-codes [style] [top_m]     show the most probable codes per style\n"
    "  selftest                          run the built-in verification battery\n"
    "\n"
    "flags:\n"
    "  --config <file>       configuration file (key = value lines)\n"
    "  --seed <n>            random seed (default: the configuration's seed)\n"
    "  --mode <m>            personage | e2e (default: the configuration's mode)\n"
    "  --checkpoint <file>   checkpoint to load (train: resume from it)\n"
    "  --out <path>          output file, or directory for prepare/train\n"
    "  --threads <n>         worker threads for generation (default 1)\n"
    "  --decode <d>          greedy | sample (default greedy)\n"
    "  --temperature <t>     sampled-decoding temperature (default 1.0)\n";

// One owned C string from the library.
struct CStr {
    char* p = nullptr;
    ~CStr() { fvn_string_free(p); }
    std::string str() const { return p != nullptr ? std::string(p) : std::string(); }
};

struct Model {
    fvn_model* m = nullptr;
    ~Model() { fvn_model_close(m); }
};

struct UsageError {
    std::string message;
};

struct Args {
    std::string command;
    std::vector<std::string> positionals;
    std::map<std::string, std::string> flags;

    bool has(const std::string& flag) const { return flags.count(flag) != 0; }
    std::string get(const std::string& flag, const std::string& fallback = "") const {
        auto it = flags.find(flag);
        return it != flags.end() ? it->second : fallback;
    }
};

const std::vector<std::string> kFlags = {"--config", "--seed",    "--mode",   "--checkpoint",
                                         "--out",    "--threads", "--decode", "--temperature"};

Args parse_args(int argc, char** argv) {
    Args args;
    if (argc < 2) throw UsageError{"a command is required"};
    args.command = argv[1];
    for (int i = 2; i < argc; ++i) {
        std::string a = argv[i];
        if (a.rfind("--", 0) == 0) {
            if (std::find(kFlags.begin(), kFlags.end(), a) == kFlags.end()) {
                throw UsageError{"unknown flag '" + a + "'"};
            }
            if (i + 1 >= argc) throw UsageError{a + " needs a value"};
            args.flags[a] = argv[++i];
        } else {
            args.positionals.push_back(std::move(a));
        }
    }
    return args;
}

const char* status_category(fvn_status s) {
    switch (s) {
        case FVN_OK: return "ok";
        case FVN_ERR_ARGUMENT: return "argument";
        case FVN_ERR_DIMENSION: return "dimension";
        case FVN_ERR_NUMERIC: return "numeric";
        case FVN_ERR_PARSE: return "parse";
        case FVN_ERR_FORMAT: return "format";
        case FVN_ERR_IO: return "io";
        case FVN_ERR_INTEGRITY: return "integrity";
        case FVN_ERR_STATE: return "state";
        case FVN_ERR_CONFIG: return "config";
        default: return "unknown";
    }
}

// Library failure -> single-line stderr message and a process exit code.
struct CommandError {
    fvn_status status;
    std::string message;
};

void check(fvn_status s) {
    if (s != FVN_OK) throw CommandError{s, fvn_last_error()};
}

// Renders the effective configuration: file (when given), then flag
// overrides. The result is the manifest's configuration snapshot.
std::string render_snapshot(const Args& args) {
    std::vector<const char*> keys;
    std::vector<const char*> values;
    if (args.has("--mode")) {
        keys.push_back("mode");
        values.push_back(args.flags.at("--mode").c_str());
    }
    if (args.has("--seed")) {
        keys.push_back("seed");
        values.push_back(args.flags.at("--seed").c_str());
    }
    CStr text;
    check(fvn_config_render(args.has("--config") ? args.flags.at("--config").c_str() : nullptr,
                            keys.data(), values.data(), static_cast<int>(keys.size()), &text.p));
    return text.str();
}

// Value of one key in canonical `key = value` text; empty when absent.
std::string config_value(const std::string& text, const std::string& key) {
    const std::string prefix = key + " = ";
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        if (text.compare(pos, std::min(prefix.size(), eol - pos), prefix) == 0) {
            return text.substr(pos + prefix.size(), eol - pos - prefix.size());
        }
        pos = eol + 1;
    }
    return "";
}

uint64_t parse_seed(const std::string& s) {
    try {
        size_t used = 0;
        uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError{"--seed must be a non-negative integer, got '" + s + "'"};
    }
}

int parse_int_flag(const std::string& s, const char* flag) {
    try {
        size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError{std::string(flag) + " must be an integer, got '" + s + "'"};
    }
}

double parse_double_flag(const std::string& s, const char* flag) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError{std::string(flag) + " must be a number, got '" + s + "'"};
    }
}

// The seed a command actually uses: the --seed flag, else the snapshot's.
uint64_t effective_seed(const Args& args, const std::string& snapshot) {
    if (args.has("--seed")) return parse_seed(args.flags.at("--seed"));
    std::string s = config_value(snapshot, "seed");
    return s.empty() ? 1 : parse_seed(s);
}

void ensure_parent_dir(const std::string& path) {
    fs::path parent = fs::path(path).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw CommandError{FVN_ERR_IO, "cannot create directory '" + parent.string() + "': " + ec.message()};
}

// Writes <dir>/<command>.manifest.json describing this run.
void write_command_manifest(const std::string& command, const std::string& dir,
                            const std::string& snapshot, uint64_t seed,
                            const std::vector<std::string>& inputs,
                            const std::vector<std::string>& outputs,
                            const std::string& started, const std::string& finished) {
    std::vector<const char*> in_ptrs, out_ptrs;
    for (const auto& p : inputs) in_ptrs.push_back(p.c_str());
    for (const auto& p : outputs) out_ptrs.push_back(p.c_str());
    std::string path = (fs::path(dir.empty() ? "." : dir) / (command + ".manifest.json")).string();
    check(fvn_manifest_write(path.c_str(), command.c_str(), snapshot.c_str(), seed,
                             in_ptrs.data(), static_cast<int>(in_ptrs.size()),
                             out_ptrs.data(), static_cast<int>(out_ptrs.size()),
                             started.c_str(), finished.c_str()));
    std::printf("manifest\t%s\n", path.c_str());
}

std::string timestamp() {
    CStr t;
    check(fvn_timestamp_utc(&t.p));
    return t.str();
}

void require_positionals(const Args& args, size_t min_n, size_t max_n, const char* shape) {
    if (args.positionals.size() < min_n || args.positionals.size() > max_n) {
        throw UsageError{std::string("expected ") + shape};
    }
}

// Checkpoint-backed commands take the model's stored configuration as their
// snapshot; a --mode flag may restate it but never contradict it.
std::string model_snapshot(const Args& args, const fvn_model* model) {
    CStr text;
    check(fvn_model_config(model, &text.p));
    std::string snapshot = text.str();
    if (args.has("--mode")) {
        std::string stored = config_value(snapshot, "mode");
        if (args.flags.at("--mode") != stored) {
            throw CommandError{FVN_ERR_CONFIG, "checkpoint mode '" + stored +
                                                   "' does not match --mode '" + args.flags.at("--mode") + "'"};
        }
    }
    return snapshot;
}

std::string required_flag(const Args& args, const std::string& flag) {
    if (!args.has(flag)) throw UsageError{args.command + " requires " + flag};
    return args.flags.at(flag);
}

int cmd_prepare(const Args& args) {
    require_positionals(args, 1, 2, "prepare <train_csv> [test_csv]");
    std::string snapshot = render_snapshot(args);
    std::string mode = config_value(snapshot, "mode");
    uint64_t seed = effective_seed(args, snapshot);
    const std::string& train = args.positionals[0];
    const char* test = args.positionals.size() > 1 ? args.positionals[1].c_str() : nullptr;
    std::string out_dir = args.get("--out");

    std::string started = timestamp();
    CStr summary;
    check(fvn_prepare(train.c_str(), test, mode.c_str(),
                      out_dir.empty() ? nullptr : out_dir.c_str(), &summary.p));
    std::fputs(summary.str().c_str(), stdout);

    std::vector<std::string> inputs = {train};
    if (test != nullptr) inputs.push_back(test);
    std::vector<std::string> outputs;
    if (!out_dir.empty()) {
        outputs.push_back((fs::path(out_dir) / "train.jsonl").string());
        if (test != nullptr) outputs.push_back((fs::path(out_dir) / "test.jsonl").string());
    }
    write_command_manifest("prepare", out_dir, snapshot, seed, inputs, outputs, started, timestamp());
    return 0;
}

int cmd_train(const Args& args) {
    require_positionals(args, 0, 0, "train with --config <file>");
    required_flag(args, "--config");
    std::string snapshot = render_snapshot(args);
    uint64_t seed = effective_seed(args, snapshot);
    std::string out_dir = args.get("--out", ".");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw CommandError{FVN_ERR_IO, "cannot create directory '" + out_dir + "': " + ec.message()};

    std::string best = (fs::path(out_dir) / "best.ckpt").string();
    std::string latest = (fs::path(out_dir) / "latest.ckpt").string();
    std::string log = (fs::path(out_dir) / "train_log.jsonl").string();
    const char* resume = args.has("--checkpoint") ? args.flags.at("--checkpoint").c_str() : nullptr;
    if (resume == nullptr) {
        // The library appends to the epoch log (resume continues a file);
        // a fresh run starts from an empty one so reruns are identical.
        std::ofstream(log, std::ios::binary | std::ios::trunc);
    }

    std::string started = timestamp();
    CStr summary;
    check(fvn_train(snapshot.c_str(), resume, best.c_str(), latest.c_str(), log.c_str(), &summary.p));
    std::fputs(summary.str().c_str(), stdout);

    std::vector<std::string> inputs = {args.flags.at("--config")};
    std::string train_csv = config_value(snapshot, "train_csv");
    if (!train_csv.empty()) inputs.push_back(train_csv);
    if (resume != nullptr) inputs.push_back(resume);
    write_command_manifest("train", out_dir, snapshot, seed, inputs, {best, latest, log}, started,
                           timestamp());
    return 0;
}

int cmd_build_codes(const Args& args) {
    require_positionals(args, 0, 0, "build-codes with --checkpoint <file>");
    std::string ckpt = required_flag(args, "--checkpoint");
    std::string out = args.get("--out", "codes.ckpt");
    ensure_parent_dir(out);

    Model model;
    check(fvn_model_open(ckpt.c_str(), &model.m));
    std::string snapshot = model_snapshot(args, model.m);
    uint64_t seed = effective_seed(args, snapshot);

    std::string started = timestamp();
    CStr summary;
    check(fvn_build_codes(model.m, out.c_str(), &summary.p));
    std::fputs(summary.str().c_str(), stdout);

    std::vector<std::string> inputs = {ckpt};
    std::string train_csv = config_value(snapshot, "train_csv");
    if (!train_csv.empty()) inputs.push_back(train_csv);
    write_command_manifest("build-codes", fs::path(out).parent_path().string(), snapshot, seed,
                           inputs, {out}, started, timestamp());
    return 0;
}

int cmd_generate(const Args& args) {
    require_positionals(args, 1, 1, "generate <conditions_csv> with --checkpoint <file>");
    std::string ckpt = required_flag(args, "--checkpoint");
    const std::string& conditions = args.positionals[0];
    std::string out = args.get("--out", "generated.txt");
    ensure_parent_dir(out);
    std::string decode = args.get("--decode", "greedy");
    double temperature = parse_double_flag(args.get("--temperature", "1"), "--temperature");
    int threads = parse_int_flag(args.get("--threads", "1"), "--threads");

    Model model;
    check(fvn_model_open(ckpt.c_str(), &model.m));
    std::string snapshot = model_snapshot(args, model.m);
    uint64_t seed = effective_seed(args, snapshot);

    std::string started = timestamp();
    CStr summary;
    check(fvn_generate(model.m, conditions.c_str(), out.c_str(), seed, decode.c_str(), temperature,
                       threads, &summary.p));
    std::fputs(summary.str().c_str(), stdout);

    write_command_manifest("generate", fs::path(out).parent_path().string(), snapshot, seed,
                           {ckpt, conditions}, {out}, started, timestamp());
    return 0;
}

int cmd_evaluate(const Args& args) {
    require_positionals(args, 2, 3, "evaluate <hypotheses> <references> [conditions_csv]");
    std::string snapshot = render_snapshot(args);
    std::string mode = config_value(snapshot, "mode");
    uint64_t seed = effective_seed(args, snapshot);
    const std::string& hyp = args.positionals[0];
    const std::string& ref = args.positionals[1];
    const char* cmr = args.positionals.size() > 2 ? args.positionals[2].c_str() : nullptr;
    // A configuration naming a training corpus turns on style scoring: the
    // classifier trains on that corpus and checks the conditions' labels.
    std::string style_train = config_value(snapshot, "train_csv");
    const char* style_csv = (!style_train.empty() && cmr != nullptr) ? style_train.c_str() : nullptr;
    std::string out = args.get("--out");

    std::string started = timestamp();
    CStr human, machine;
    check(fvn_evaluate(hyp.c_str(), ref.c_str(), cmr, style_csv, mode.c_str(), seed, &human.p,
                       &machine.p));
    std::fputs(human.str().c_str(), stdout);

    std::vector<std::string> outputs;
    if (!out.empty()) {
        ensure_parent_dir(out);
        std::ofstream f(out, std::ios::binary | std::ios::trunc);
        if (!f) throw CommandError{FVN_ERR_IO, "cannot write " + out};
        f << machine.str();
        outputs.push_back(out);
    }
    std::vector<std::string> inputs = {hyp, ref};
    if (cmr != nullptr) inputs.push_back(cmr);
    if (style_csv != nullptr) inputs.push_back(style_csv);
    write_command_manifest("evaluate",
                           out.empty() ? std::string() : fs::path(out).parent_path().string(),
                           snapshot, seed, inputs, outputs, started, timestamp());
    return 0;
}

int cmd_inspect_codes(const Args& args) {
    require_positionals(args, 0, 2, "inspect-codes [style_key] [top_m] with --checkpoint <file>");
    std::string ckpt = required_flag(args, "--checkpoint");
    const char* style = args.positionals.size() > 0 ? args.positionals[0].c_str() : nullptr;
    int top_m = args.positionals.size() > 1 ? parse_int_flag(args.positionals[1], "top_m") : 5;

    Model model;
    check(fvn_model_open(ckpt.c_str(), &model.m));
    std::string snapshot = model_snapshot(args, model.m);
    uint64_t seed = effective_seed(args, snapshot);

    std::string started = timestamp();
    CStr report;
    check(fvn_inspect_codes(model.m, style, top_m, seed, &report.p));
    std::fputs(report.str().c_str(), stdout);

    std::string out = args.get("--out");
    std::vector<std::string> outputs;
    if (!out.empty()) {
        ensure_parent_dir(out);
        std::ofstream f(out, std::ios::binary | std::ios::trunc);
        if (!f) throw CommandError{FVN_ERR_IO, "cannot write " + out};
        f << report.str();
        outputs.push_back(out);
    }
    write_command_manifest("inspect-codes",
                           out.empty() ? std::string() : fs::path(out).parent_path().string(),
                           snapshot, seed, {ckpt}, outputs, started, timestamp());
    return 0;
}

int cmd_selftest(const Args& args) {
    require_positionals(args, 0, 0, "selftest");
    std::string snapshot = render_snapshot(args);
    uint64_t seed = effective_seed(args, snapshot);

    std::string started = timestamp();
    CStr report;
    int passed = 0;
    check(fvn_selftest(&report.p, &passed));
    std::fputs(report.str().c_str(), stdout);

    std::string out = args.get("--out");
    std::vector<std::string> outputs;
    if (!out.empty()) {
        ensure_parent_dir(out);
        std::ofstream f(out, std::ios::binary | std::ios::trunc);
        if (!f) throw CommandError{FVN_ERR_IO, "cannot write " + out};
        f << report.str();
        outputs.push_back(out);
    }
    write_command_manifest("selftest",
                           out.empty() ? std::string() : fs::path(out).parent_path().string(),
                           snapshot, seed, {}, outputs, started, timestamp());
    return passed == 1 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        if (argc >= 2 && (std::strcmp(argv[1], "--help") == 0 || std::strcmp(argv[1], "-h") == 0)) {
            std::fputs(kUsage, stdout);
            return 0;
        }
        Args args = parse_args(argc, argv);
        if (args.command == "prepare") return cmd_prepare(args);
        if (args.command == "train") return cmd_train(args);
        if (args.command == "build-codes") return cmd_build_codes(args);
        if (args.command == "generate") return cmd_generate(args);
        if (args.command == "evaluate") return cmd_evaluate(args);
        if (args.command == "inspect-codes") return cmd_inspect_codes(args);
        if (args.command == "selftest") return cmd_selftest(args);
        throw UsageError{"unknown command '" + args.command + "'"};
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: usage: %s\n", e.message.c_str());
        return 2;
    } catch (const CommandError& e) {
        std::fprintf(stderr, "error: %s: %s\n", status_category(e.status), e.message.c_str());
        return static_cast<int>(e.status);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: unknown: %s\n", e.what());
        return static_cast<int>(FVN_ERR_UNKNOWN);
    }
}
