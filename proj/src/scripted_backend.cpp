#include "llmloc/scripted_backend.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <set>

using nlohmann::json;

namespace llmloc {

AnswerScript AnswerScript::parse(std::string_view text) {
    AnswerScript s;
    try {
        auto doc = json::parse(text);
        const json annotate = doc.value("annotate", json::object());
        for (const auto& [path, labels] : annotate.items()) {
            auto& out = s.annotate[path];
            for (const auto& l : labels)
                out.push_back({l.at(0).get<std::string>(), l.at(1).get<std::string>(), l.at(2).get<std::string>()});
        }
        s.infer = doc.value("infer", std::vector<std::string>{});
        s.retrieve = doc.value("retrieve", std::vector<std::string>{});
        const json counterfactual = doc.value("counterfactual", json::object());
        for (const auto& [path, v] : counterfactual.items())
            s.counterfactual[path] = {v.at(0).get<double>(), v.at(1).get<std::string>()};
        s.pairwise_order = doc.value("pairwise_order", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string("answer script: ") + e.what());
    }
    return s;
}

AnswerScript AnswerScript::load(const std::string& path) { return parse(read_file(path)); }

namespace {

std::vector<std::string> values_after(std::string_view prompt, std::string_view marker) {
    std::vector<std::string> out;
    for (auto line : split_lines(prompt))
        if (starts_with(line, marker)) out.emplace_back(trim(line.substr(marker.size())));
    return out;
}

std::string one_value(std::string_view prompt, std::string_view marker) {
    auto v = values_after(prompt, marker);
    if (v.size() != 1) throw Error(ErrorKind::gateway, "scripted backend: expected one '" + std::string(marker) + "' line");
    return v.front();
}

std::string fence(const std::string& body) { return "```\n" + body + "```\n"; }

}  // namespace

std::string ScriptedBackend::answer(const ChatRequest& req) const {
    const std::string& p = req.rendered_prompt;
    auto missing = [&](const std::string& what) {
        return Error(ErrorKind::gateway, "scripted backend (" + req.template_id + "): no answer for " + what);
    };

    if (starts_with(req.template_id, "annotate.")) {
        std::string body;
        for (const auto& path : values_after(p, "### FILE: ")) {
            auto it = script_.annotate.find(path);
            if (it == script_.annotate.end()) throw missing(path);
            for (const auto& l : it->second) body += path + " | " + l.role + " | " + l.phrase + " | " + l.keywords + "\n";
        }
        return fence(body);
    }
    if (starts_with(req.template_id, "infer.")) {
        std::set<std::string> listed;
        auto section = p.find("## REPOSITORY FILES");
        for (const auto& line : values_after(std::string_view(p).substr(section == std::string::npos ? 0 : section), "- "))
            listed.insert(line.substr(0, line.find(" | ")));
        std::string body;
        for (const auto& path : script_.infer)
            if (listed.contains(path)) body += path + "\n";
        return fence(body);
    }
    if (starts_with(req.template_id, "retrieve.")) {
        std::string body;
        for (const auto& r : script_.retrieve) body += r + "\n";
        return fence(body);
    }
    if (starts_with(req.template_id, "counterfactual.")) {
        auto path = one_value(p, "## CANDIDATE: ");
        auto it = script_.counterfactual.find(path);
        if (it == script_.counterfactual.end()) throw missing(path);
        char score[32];
        std::snprintf(score, sizeof score, "%.1f", it->second.first);
        return fence(std::string("score: ") + score + "\nrationale: " + it->second.second + "\n");
    }
    if (starts_with(req.template_id, "pairwise.")) {
        auto a = one_value(p, "## CANDIDATE A: ");
        auto b = one_value(p, "## CANDIDATE B: ");
        auto pos = [&](const std::string& path) {
            auto it = std::find(script_.pairwise_order.begin(), script_.pairwise_order.end(), path);
            if (it == script_.pairwise_order.end()) throw missing(path);
            return it - script_.pairwise_order.begin();
        };
        return fence(pos(a) < pos(b) ? "A\n" : "B\n");
    }
    throw Error(ErrorKind::gateway, "scripted backend: unknown template " + req.template_id);
}

BackendReply ScriptedBackend::send(const ChatRequest& req) {
    BackendReply r;
    r.text = answer(req);
    r.input_tokens = estimate_tokens(req.rendered_prompt.size());
    r.output_tokens = estimate_tokens(r.text.size());
    return r;
}

}  // namespace llmloc
