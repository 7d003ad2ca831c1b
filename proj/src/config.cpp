#include "llmloc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <functional>
#include <map>
#include <sstream>

namespace llmloc {

namespace {

std::size_t to_size(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    unsigned long long n = 0;
    try {
        if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
        n = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw Error(ErrorKind::usage, key + ": expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(n);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw Error(ErrorKind::usage, key + ": expected a number, got '" + v + "'");
    return d;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw Error(ErrorKind::usage, key + ": expected true or false, got '" + v + "'");
}

std::set<std::string> to_set(const std::string& v) {
    std::set<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) out.emplace(t);
    return out;
}

using Setter = std::function<void(GlobalConfig&, const std::string& key, const std::string& value)>;

struct KeySpec {
    ConfigKey doc;
    Setter set;
};

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = {
        {{"ingest.source_extensions", ".py", "parsed source file extensions, comma separated"},
         [](auto& c, auto&, auto& v) { c.pipeline.ingest.source_extensions = to_set(v); }},
        {{"ingest.text_extensions", ".yaml,.yml,.json,.jinja2,.txt,.toml,.md", "unparsed text file extensions"},
         [](auto& c, auto&, auto& v) { c.pipeline.ingest.text_extensions = to_set(v); }},
        {{"ingest.excluded_dirs", "__pycache__,.git,.venv,venv,node_modules,.idea,.vscode", "directories never scanned"},
         [](auto& c, auto&, auto& v) { c.pipeline.ingest.excluded_dirs = to_set(v); }},
        {{"ingest.excluded_files", "setup.py", "file names never scanned"},
         [](auto& c, auto&, auto& v) { c.pipeline.ingest.excluded_files = to_set(v); }},
        {{"ingest.max_file_bytes", "1048576", "larger files become nodes without parsing"},
         [](auto& c, auto& k, auto& v) { c.pipeline.ingest.max_file_bytes = to_size(k, v); }},
        {{"annotator.k_s", "10", "analysis seeds"},
         [](auto& c, auto& k, auto& v) { c.pipeline.annotator.k_s = to_size(k, v); }},
        {{"annotator.k_h", "1", "BFS hops around the seeds"},
         [](auto& c, auto& k, auto& v) { c.pipeline.annotator.k_h = to_size(k, v); }},
        {{"annotator.k_e", "5", "expansion files kept after BM25"},
         [](auto& c, auto& k, auto& v) { c.pipeline.annotator.k_e = to_size(k, v); }},
        {{"annotator.w_c", "0.7", "seed score weight of type coverage"},
         [](auto& c, auto& k, auto& v) { c.pipeline.annotator.score_cfg.w_c = to_double(k, v); }},
        {{"annotator.w_d", "0.3", "seed score weight of match density"},
         [](auto& c, auto& k, auto& v) { c.pipeline.annotator.score_cfg.w_d = to_double(k, v); }},
        {{"annotator.bm25_k1", "1.2", "BM25 term-frequency saturation"},
         [](auto& c, auto& k, auto& v) { c.pipeline.annotator.bm25.k1 = to_double(k, v); }},
        {{"annotator.bm25_b", "0.75", "BM25 length normalization"},
         [](auto& c, auto& k, auto& v) { c.pipeline.annotator.bm25.b = to_double(k, v); }},
        {{"annotator.context_fraction", "0.8", "share of the model context one annotation batch may use"},
         [](auto& c, auto& k, auto& v) { c.pipeline.annotator.context_fraction = to_double(k, v); }},
        {{"analyzer.k_i", "5", "inference results kept"},
         [](auto& c, auto& k, auto& v) { c.pipeline.analyzer.k_i = to_size(k, v); }},
        {{"analyzer.k_r", "5", "retrieval results kept"},
         [](auto& c, auto& k, auto& v) { c.pipeline.analyzer.k_r = to_size(k, v); }},
        {{"analyzer.direct", "true", "use files named in the description"},
         [](auto& c, auto& k, auto& v) { c.pipeline.analyzer.use_direct = to_bool(k, v); }},
        {{"analyzer.inference", "true", "use symptom-based inference"},
         [](auto& c, auto& k, auto& v) { c.pipeline.analyzer.use_inference = to_bool(k, v); }},
        {{"analyzer.retrieval", "true", "use annotation-based retrieval"},
         [](auto& c, auto& k, auto& v) { c.pipeline.analyzer.use_retrieval = to_bool(k, v); }},
        {{"validator.enabled", "true", "score and rank candidates; off reports analyzer order"},
         [](auto& c, auto& k, auto& v) { c.pipeline.use_validator = to_bool(k, v); }},
        {{"validator.max_intermediate", "2", "non-candidate nodes allowed between two candidates in one context"},
         [](auto& c, auto& k, auto& v) { c.pipeline.validator.max_intermediate = to_size(k, v); }},
        {{"validator.content_limit_bytes", "16000", "file content included per candidate"},
         [](auto& c, auto& k, auto& v) { c.pipeline.validator.content_limit_bytes = to_size(k, v); }},
        {{"gateway.backend", "replay", "replay or http"},
         [](auto& c, auto&, auto& v) { c.backend.kind = v; }},
        {{"gateway.base_url", "https://api.openai.com/v1", "chat-completions endpoint prefix"},
         [](auto& c, auto&, auto& v) { c.backend.http.base_url = v; }},
        {{"gateway.model", "gpt-4o-mini", "model name sent to the endpoint and used for pricing"},
         [](auto& c, auto&, auto& v) {
             c.backend.http.model = v;
             c.gateway.model = v;
         }},
        {{"gateway.api_key_env", "OPENAI_API_KEY", "environment variable holding the API key"},
         [](auto& c, auto&, auto& v) { c.backend.http.api_key_env = v; }},
        {{"gateway.max_context_tokens", "128000", "model context size used for batching"},
         [](auto& c, auto& k, auto& v) { c.gateway.max_context_tokens = to_size(k, v); }},
        {{"gateway.max_in_flight", "4", "concurrent requests"},
         [](auto& c, auto& k, auto& v) { c.gateway.max_in_flight = to_size(k, v); }},
        {{"gateway.max_retries", "3", "retries after a transport error"},
         [](auto& c, auto& k, auto& v) { c.gateway.max_retries = to_size(k, v); }},
        {{"gateway.timeout_seconds", "120", "HTTP connect and read timeout"},
         [](auto& c, auto& k, auto& v) { c.backend.http.timeout = std::chrono::seconds(to_size(k, v)); }},
        {{"paths.graph", "graph.json", "graph document"},
         [](auto& c, auto&, auto& v) { c.paths.graph = v; }},
        {{"paths.patterns", "patterns.json", "pattern library document"},
         [](auto& c, auto&, auto& v) { c.paths.patterns = v; }},
        {{"paths.prompts", "", "directory overriding the built-in prompt templates"},
         [](auto& c, auto&, auto& v) { c.paths.prompts = v; }},
        {{"paths.sessions", "sessions", "replay session directory"},
         [](auto& c, auto&, auto& v) { c.paths.sessions = v; }},
        {{"paths.runs", "runs", "benchmark output directory"},
         [](auto& c, auto&, auto& v) { c.paths.runs = v; }},
    };
    return specs;
}

}  // namespace

void GlobalConfig::validate() const {
    pipeline.ingest.validate();
    pipeline.annotator.validate();
    pipeline.analyzer.validate();
    if (backend.kind != "replay" && backend.kind != "http")
        throw Error(ErrorKind::usage, "gateway.backend must be 'replay' or 'http', got '" + backend.kind + "'");
    if (gateway.max_context_tokens == 0) throw Error(ErrorKind::usage, "gateway.max_context_tokens must be positive");
    if (gateway.max_in_flight == 0) throw Error(ErrorKind::usage, "gateway.max_in_flight must be positive");
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& s : key_specs()) out.push_back(s.doc);
        out.push_back({"prices.<model>", "", "\"input_per_1k, output_per_1k\" in USD"});
        return out;
    }();
    return keys;
}

std::string describe_config_keys() {
    std::string out = "Config file keys (INI sections; flags override the file, the file overrides defaults):\n";
    for (const auto& k : config_keys()) {
        std::string line = "  " + k.key;
        line.resize(std::max<std::size_t>(line.size() + 1, 32), ' ');
        line += k.help;
        if (!k.default_value.empty()) line += " [default: " + k.default_value + "]";
        out += line + "\n";
    }
    return out;
}

GlobalConfig parse_config(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::usage, std::string("config: ") + e.what());
    }
    std::map<std::string, const Setter*> setters;
    for (const auto& s : key_specs()) setters.emplace(s.doc.key, &s.set);

    GlobalConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw Error(ErrorKind::usage, "config: key '" + section + "' outside any section");
        for (const auto& [name, value] : body) {
            const std::string key = section + "." + name;
            const std::string v(trim(value.data()));
            if (section == "prices") {
                auto comma = v.find(',');
                if (comma == std::string::npos) throw Error(ErrorKind::usage, key + ": expected 'input_per_1k, output_per_1k'");
                cfg.gateway.prices[name] = {to_double(key, std::string(trim(v.substr(0, comma)))),
                                            to_double(key, std::string(trim(v.substr(comma + 1))))};
                continue;
            }
            auto it = setters.find(key);
            if (it == setters.end()) throw Error(ErrorKind::usage, "config: unknown key '" + key + "'");
            (*it->second)(cfg, key, v);
        }
    }
    if (cfg.gateway.model.empty()) cfg.gateway.model = cfg.backend.http.model;
    cfg.validate();
    return cfg;
}

GlobalConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw Error(ErrorKind::io, "config file not readable: " + path);
    }
    return parse_config(text);
}

}  // namespace llmloc
