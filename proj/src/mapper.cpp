#include "gapsense/mapper.h"

#include <algorithm>

namespace gapsense {

void MapperConfig::validate() const {
    if (!(min_gap_ms >= 1000.0)) {
        throw ValidationError("min_gap_ms must be >= 1000");
    }
    if (adjust_pre_ms < 0.0 || adjust_post_ms < 0.0 || context_pad_ms < 0.0) {
        throw ValidationError("mapper windows must be non-negative");
    }
}

namespace {

ExclusiveChangeList exclusive_for(const ChangeTimeline& own, const ChangeTimeline& other,
                                  const ChangeTimeline& audio, const MapperConfig& cfg) {
    ExclusiveChangeList out;
    out.user = own.user;
    std::vector<bool> used(audio.changes.size(), false);

    std::vector<Interval> changes = own.changes;
    std::sort(changes.begin(), changes.end(),
              [](const Interval& a, const Interval& b) { return a.start_ms < b.start_ms; });

    for (const Interval& imu : changes) {
        for (std::size_t k = 0; k < audio.changes.size(); ++k) {
            if (used[k]) {
                continue;
            }
            const Interval& acoustic = audio.changes[k];
            const Interval widened = acoustic.dilated(cfg.adjust_pre_ms, cfg.adjust_post_ms);
            if (!widened.contains(imu) || widened.duration() < cfg.min_gap_ms || other.any_intersects(widened)) {
                continue;
            }
            used[k] = true;
            const Interval theta_zeta(std::min(acoustic.start_ms, imu.start_ms),
                                      std::max(acoustic.end_ms, imu.end_ms));
            const Interval context(std::max(0.0, theta_zeta.start_ms - cfg.context_pad_ms),
                                   theta_zeta.end_ms + cfg.context_pad_ms);
            out.entries.push_back({own.user, imu, theta_zeta, context});
            break;
        }
    }
    return out;
}

} // namespace

std::pair<ExclusiveChangeList, ExclusiveChangeList> find_exclusive_changes(const ChangeTimeline& tl_m,
                                                                           const ChangeTimeline& tl_n,
                                                                           const ChangeTimeline& tl_audio,
                                                                           const MapperConfig& cfg) {
    cfg.validate();
    return {exclusive_for(tl_m, tl_n, tl_audio, cfg), exclusive_for(tl_n, tl_m, tl_audio, cfg)};
}

Interval gap_query_window(const ExclusiveChange& e, const Interval& audio_span, const MapperConfig& cfg) {
    double start = e.imu_interval.start_ms + cfg.adjust_pre_ms;
    double end = e.imu_interval.end_ms + cfg.adjust_post_ms;
    constexpr double min_len = 1000.0;
    if (end - start < min_len) {
        const double c = 0.5 * (start + end);
        start = c - 0.5 * min_len;
        end = c + 0.5 * min_len;
    }
    if (start < audio_span.start_ms) {
        end += audio_span.start_ms - start;
        start = audio_span.start_ms;
    }
    if (end > audio_span.end_ms) {
        start -= end - audio_span.end_ms;
        end = audio_span.end_ms;
    }
    start = std::max(start, audio_span.start_ms);
    return {start, end};
}

VoteResult vote_activity_for_other(const ExclusiveChangeList& list, const std::string& other_user,
                                   const HarBackend& backend, const AudioStream& audio,
                                   const LabelSpace& primary_set, const MapperConfig& cfg) {
    VoteResult out;
    out.source_user = list.user;
    out.for_user = other_user;

    struct Tally {
        int votes = 0;
        double confidence = 0.0;
    };
    std::map<ActivityLabel, Tally> tally;
    const Interval span = audio.span();
    for (const auto& e : list.entries) {
        const Interval w = gap_query_window(e, span, cfg);
        const HarPrediction pred = backend.classify(slice_audio(audio, w));
        const auto top = pred.top_in(primary_set);
        out.per_entry.push_back(top);
        ++out.queried;
        if (top) {
            auto& t = tally[top->label];
            ++t.votes;
            t.confidence += top->confidence;
            ++out.total;
        }
    }

    // Majority; ties by summed confidence, then label order (std::map iterates sorted).
    const Tally* best = nullptr;
    for (const auto& [label, t] : tally) {
        if (!best || t.votes > best->votes || (t.votes == best->votes && t.confidence > best->confidence)) {
            best = &t;
            out.label = label;
        }
    }
    if (best) {
        out.votes = best->votes;
        out.confidence_sum = best->confidence;
    }
    return out;
}

UserActivityMap resolve(const VoteResult& vote_from_m, const VoteResult& vote_from_n, std::size_t exclusive_m,
                        std::size_t exclusive_n, const MapperConfig& cfg, const LabelSpace& labels) {
    const std::string& m = vote_from_m.source_user;
    const std::string& n = vote_from_n.source_user;

    UserActivityMap out;
    out.assignments[m] = {};
    out.assignments[n] = {};
    if (exclusive_m > exclusive_n) {
        out.opportunistic_user = m;
    } else if (exclusive_n > exclusive_m) {
        out.opportunistic_user = n;
    }

    const auto assign = [&](const std::string& user, const VoteResult& v) {
        out.assignments[user] = {v.label, v.votes, v.total};
    };

    if (vote_from_m.decided() && vote_from_n.decided() && *vote_from_m.label == *vote_from_n.label) {
        out.conflict = true;
        if (!out.opportunistic_user) {
            return out;
        }
        const bool m_opportunistic = *out.opportunistic_user == m;
        const VoteResult& trusted = m_opportunistic ? vote_from_m : vote_from_n;
        assign(trusted.for_user, trusted);
        out.conflict_resolved = true;
        if (cfg.assign_by_elimination && labels.size() == 2) {
            const auto& l = labels.labels();
            const ActivityLabel& rest = l[0] == *trusted.label ? l[1] : l[0];
            out.assignments[trusted.source_user] = {rest, 0, 0};
        }
        return out;
    }
    if (vote_from_m.decided()) {
        assign(vote_from_m.for_user, vote_from_m);
    }
    if (vote_from_n.decided()) {
        assign(vote_from_n.for_user, vote_from_n);
    }
    return out;
}

} // namespace gapsense
