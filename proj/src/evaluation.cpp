#include "gapsense/pipeline.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace gapsense {

using nlohmann::ordered_json;

namespace {

Eigen::Index count_in(const Eigen::VectorXd& t, double a, double b) {
    if (!(a < b)) {
        return 0;
    }
    const double* first = t.data();
    const double* last = first + t.size();
    return std::lower_bound(first, last, b) - std::lower_bound(first, last, a);
}

void check_disjoint(const AnnotationSet& ann) {
    for (std::size_t i = 1; i < ann.records.size(); ++i) {
        if (ann.records[i].interval.start_ms < ann.records[i - 1].interval.end_ms) {
            throw ValidationError("annotations of '" + ann.user + "' overlap or are not sorted");
        }
    }
}

ordered_json number(double v) {
    if (std::isfinite(v) && v == std::round(v) && std::abs(v) < 1e15) {
        return static_cast<std::int64_t>(v);
    }
    return v;
}

ordered_json interval_json(const Interval& w) { return ordered_json::array({number(w.start_ms), number(w.end_ms)}); }

ordered_json optional_label(const std::optional<ActivityLabel>& l) { return l ? ordered_json(*l) : ordered_json(); }

} // namespace

Eigen::VectorXd truth_instance_grid(const std::vector<TruthRecord>& truth, const std::string& user, double rate_hz) {
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (const auto& r : truth) {
        if (r.user != user) {
            continue;
        }
        lo = any ? std::min(lo, r.interval.start_ms) : r.interval.start_ms;
        hi = any ? std::max(hi, r.interval.end_ms) : r.interval.end_ms;
        any = true;
    }
    if (!any) {
        return {};
    }
    const double step = 1000.0 / rate_hz;
    const auto n = static_cast<Eigen::Index>(std::ceil((hi - lo) / step - 1e-9));
    return Eigen::VectorXd::LinSpaced(n, lo, lo + step * static_cast<double>(n - 1));
}

std::optional<double> annotation_accuracy(const AnnotationSet& ann, const std::vector<TruthRecord>& truth,
                                          const Eigen::VectorXd& grid_t_ms) {
    check_disjoint(ann);
    std::vector<const TruthRecord*> mine;
    for (const auto& r : truth) {
        if (r.user == ann.user) {
            mine.push_back(&r);
        }
    }
    std::sort(mine.begin(), mine.end(),
              [](const TruthRecord* a, const TruthRecord* b) { return a->interval.start_ms < b->interval.start_ms; });

    Eigen::Index annotated = 0;
    Eigen::Index correct = 0;
    std::size_t first = 0;
    for (const auto& rec : ann.records) {
        annotated += count_in(grid_t_ms, rec.interval.start_ms, rec.interval.end_ms);
        while (first < mine.size() && mine[first]->interval.end_ms <= rec.interval.start_ms) {
            ++first;
        }
        for (std::size_t k = first; k < mine.size() && mine[k]->interval.start_ms < rec.interval.end_ms; ++k) {
            if (mine[k]->label == rec.label) {
                correct += count_in(grid_t_ms, std::max(rec.interval.start_ms, mine[k]->interval.start_ms),
                                    std::min(rec.interval.end_ms, mine[k]->interval.end_ms));
            }
        }
    }
    if (annotated == 0) {
        return std::nullopt;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(annotated);
}

double annotation_volume(const AnnotationSet& ann, const Eigen::VectorXd& grid_t_ms) {
    check_disjoint(ann);
    if (grid_t_ms.size() == 0) {
        return 0.0;
    }
    Eigen::Index annotated = 0;
    for (const auto& rec : ann.records) {
        annotated += count_in(grid_t_ms, rec.interval.start_ms, rec.interval.end_ms);
    }
    return 100.0 * static_cast<double>(annotated) / static_cast<double>(grid_t_ms.size());
}

std::optional<ActivityLabel> truth_primary_label(const std::vector<TruthRecord>& truth, const std::string& user) {
    std::map<ActivityLabel, double> time;
    for (const auto& r : truth) {
        if (r.user == user && r.kind == ActivityKind::primary) {
            time[r.label] += r.interval.duration();
        }
    }
    std::optional<ActivityLabel> best;
    double best_t = 0.0;
    for (const auto& [label, t] : time) {
        if (t > best_t) {
            best = label;
            best_t = t;
        }
    }
    return best;
}

EvalReport evaluate(const Scenario& scn, const PipelineResult& res) {
    EvalReport out;
    out.has_truth = scn.has_truth();
    out.timings = res.timings;
    bool any_decided = false;
    bool any_wrong = false;
    for (const ImuStream* s : {&scn.imu_a, &scn.imu_b}) {
        UserEval u;
        u.user = s->user_id;
        u.mapped_label = res.mapping.at(s->user_id).label;
        u.exclusive_changes = (s == &scn.imu_a ? res.exclusive_a : res.exclusive_b).size();
        if (out.has_truth) {
            u.truth_label = truth_primary_label(scn.ground_truth, s->user_id);
            u.mapping_correct = u.mapped_label && u.mapped_label == u.truth_label;
            any_wrong = any_wrong || (u.mapped_label && !u.mapping_correct);
        }
        any_decided = any_decided || u.mapped_label.has_value();
        for (const auto& set : res.annotations) {
            if (set.user == s->user_id) {
                u.annotated_segments = set.records.size();
                u.volume_pct = annotation_volume(set, s->t_ms);
                if (out.has_truth) {
                    u.accuracy_pct = annotation_accuracy(set, scn.ground_truth, s->t_ms);
                }
            }
        }
        out.users.push_back(std::move(u));
    }
    out.mapping_correct = out.has_truth && any_decided && !any_wrong;
    return out;
}

std::string mapping_json(const PipelineResult& res) {
    ordered_json users = ordered_json::object();
    for (const auto& [user, a] : res.mapping.assignments) {
        users[user] = {{"label", optional_label(a.label)}, {"votes", a.votes}, {"total", a.total}};
    }
    ordered_json exclusive = ordered_json::object();
    for (const auto* pair : {&res.exclusive_a, &res.exclusive_b}) {
        const VoteResult& vote = pair == &res.exclusive_a ? res.vote_from_a : res.vote_from_b;
        ordered_json list = ordered_json::array();
        for (std::size_t i = 0; i < pair->entries.size(); ++i) {
            const auto& e = pair->entries[i];
            ordered_json entry = {{"imu", interval_json(e.imu_interval)},
                                  {"audio", interval_json(e.audio_interval)},
                                  {"context", interval_json(e.context)}};
            const auto& v = i < vote.per_entry.size() ? vote.per_entry[i] : std::nullopt;
            entry["vote"] = v ? ordered_json(v->label) : ordered_json();
            entry["confidence"] = v ? ordered_json(v->confidence) : ordered_json();
            list.push_back(std::move(entry));
        }
        exclusive[pair->user] = std::move(list);
    }
    const ordered_json j = {
        {"users", users},
        {"opportunistic", res.mapping.opportunistic_user ? ordered_json(*res.mapping.opportunistic_user) : ordered_json()},
        {"conflict", res.mapping.conflict},
        {"conflict_resolved", res.mapping.conflict_resolved},
        {"exclusive_changes", exclusive},
    };
    return j.dump(2) + "\n";
}

std::string changes_json(const PipelineResult& res) {
    const auto list = [](const ChangeTimeline& tl) {
        ordered_json out = ordered_json::array();
        for (const auto& c : tl.changes) {
            out.push_back(interval_json(c));
        }
        return out;
    };
    const ordered_json j = {{"imu", {{res.imu_a.user, list(res.imu_a)}, {res.imu_b.user, list(res.imu_b)}}},
                            {"audio", list(res.audio)}};
    return j.dump(2) + "\n";
}

std::string report_json(const EvalReport& report) {
    ordered_json users = ordered_json::object();
    for (const auto& u : report.users) {
        ordered_json j = {{"mapped_label", optional_label(u.mapped_label)},
                          {"exclusive_changes", u.exclusive_changes},
                          {"annotated_segments", u.annotated_segments},
                          {"annotation_volume_pct", u.volume_pct}};
        if (report.has_truth) {
            j["truth_label"] = optional_label(u.truth_label);
            j["mapping_correct"] = u.mapping_correct;
            j["annotation_accuracy_pct"] = u.accuracy_pct ? ordered_json(*u.accuracy_pct) : ordered_json();
        }
        users[u.user] = std::move(j);
    }
    ordered_json j = {{"users", users}};
    if (report.has_truth) {
        j["mapping_correct"] = report.mapping_correct;
    }
    return j.dump(2) + "\n";
}

std::string annotations_jsonl(const std::vector<AnnotationSet>& sets) {
    std::string out;
    for (const auto& set : sets) {
        for (const auto& r : set.records) {
            const ordered_json j = {{"user", set.user},
                                    {"start_ms", number(r.interval.start_ms)},
                                    {"end_ms", number(r.interval.end_ms)},
                                    {"label", r.label},
                                    {"provenance", to_string(r.provenance)}};
            out += j.dump();
            out += '\n';
        }
    }
    return out;
}

std::vector<AnnotationSet> parse_annotations_jsonl(const std::string& text) {
    std::vector<AnnotationSet> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            const auto user = j.at("user").get<std::string>();
            const auto prov = j.at("provenance").get<std::string>();
            if (prov != "key" && prov != "knn") {
                throw ParseError("unknown provenance '" + prov + "'", line_no);
            }
            auto it = std::find_if(out.begin(), out.end(), [&](const AnnotationSet& s) { return s.user == user; });
            if (it == out.end()) {
                out.push_back({user, {}, 0});
                it = out.end() - 1;
            }
            it->records.push_back({Interval(j.at("start_ms").get<double>(), j.at("end_ms").get<double>()),
                                   j.at("label").get<std::string>(),
                                   prov == "key" ? Provenance::key : Provenance::knn, 0.0});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad annotation record: ") + e.what(), line_no);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    for (auto& set : out) {
        std::stable_sort(set.records.begin(), set.records.end(), [](const auto& a, const auto& b) {
            return a.interval.start_ms < b.interval.start_ms;
        });
    }
    return out;
}

std::string timings_json(const StageTimings& t) {
    const ordered_json j = {{"imu_cpd_ms", t.imu_cpd_ms},
                            {"audio_cpd_ms", t.audio_cpd_ms},
                            {"mapper_ms", t.mapper_ms},
                            {"annotator_ms", t.annotator_ms}};
    return j.dump(2) + "\n";
}

std::string annotation_eval_json(const std::vector<AnnotationSet>& pred, const std::vector<TruthRecord>& truth) {
    std::set<std::string> users;
    for (const auto& r : truth) {
        users.insert(r.user);
    }
    ordered_json out = ordered_json::object();
    for (const auto& user : users) {
        const Eigen::VectorXd grid = truth_instance_grid(truth, user);
        AnnotationSet mine{user, {}, 0};
        for (const auto& s : pred) {
            if (s.user == user) {
                mine.records.insert(mine.records.end(), s.records.begin(), s.records.end());
            }
        }
        std::stable_sort(mine.records.begin(), mine.records.end(),
                         [](const auto& a, const auto& b) { return a.interval.start_ms < b.interval.start_ms; });
        const auto acc = annotation_accuracy(mine, truth, grid);
        out[user] = {{"annotation_accuracy_pct", acc ? ordered_json(*acc) : ordered_json()},
                     {"annotation_volume_pct", annotation_volume(mine, grid)},
                     {"annotated_segments", mine.records.size()}};
    }
    for (const auto& s : pred) {
        if (!users.count(s.user)) {
            throw ValidationError("annotations name user '" + s.user + "' absent from the ground truth");
        }
    }
    return ordered_json{{"users", out}}.dump(2) + "\n";
}

void write_outputs(const fs::path& dir, const Scenario& scn, const PipelineResult& res, const EvalReport& report,
                   bool dump_scores) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    write_file(dir / "mapping.json", mapping_json(res));
    write_file(dir / "annotations.jsonl", annotations_jsonl(res.annotations));
    write_file(dir / "report.json", report_json(report));
    if (dump_scores) {
        write_file(dir / ("imu_scores_" + scn.imu_a.user_id + ".csv"),
                   format_series_csv("t_ms,score", res.scores_a.t_ms, res.scores_a.score));
        write_file(dir / ("imu_scores_" + scn.imu_b.user_id + ".csv"),
                   format_series_csv("t_ms,score", res.scores_b.t_ms, res.scores_b.score));
        write_file(dir / "audio_cpsd.csv", format_series_csv("t_ms,cpsd", res.cpsd.t_ms, res.cpsd.value));
        write_file(dir / "changes.json", changes_json(res));
    }
}

} // namespace gapsense
