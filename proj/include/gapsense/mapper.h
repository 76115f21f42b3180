#pragma once

#include "gapsense/har.h"
#include "gapsense/timeline.h"
#include "gapsense/types.h"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gapsense {

struct MapperConfig {
    /// Minimum acoustic gap length.
    double min_gap_ms = 1000.0;
    /// Slack applied before/after an audio change when testing containment of
    /// an IMU change, and the shift of the queried gap audio.
    double adjust_pre_ms = 500.0;
    double adjust_post_ms = 500.0;
    /// Padding of the reported context window around an acoustic gap.
    double context_pad_ms = 2000.0;
    /// On a resolved conflict, give the opportunistic user the remaining label
    /// of a two-label space instead of leaving it undecided.
    bool assign_by_elimination = false;

    void validate() const;
};

/// An IMU change of `user` inside an acoustic change while the other user's
/// IMU stays quiet.
struct ExclusiveChange {
    std::string user;
    Interval imu_interval;   ///< [nu, eta]
    Interval audio_interval; ///< [theta, zeta], contains imu_interval
    Interval context;        ///< [beta, gamma]
};

struct ExclusiveChangeList {
    std::string user;
    std::vector<ExclusiveChange> entries;

    std::size_t size() const noexcept { return entries.size(); }
};

/// Exclusive changes of both users: (list for tl_m.user, list for tl_n.user).
///
/// An IMU change of m qualifies iff some audio change, widened by the adjust
/// windows, contains it; that widened window spans at least `min_gap_ms`; and
/// no IMU change of n intersects the widened window. Each audio change serves
/// at most one IMU change per user, earliest first.
std::pair<ExclusiveChangeList, ExclusiveChangeList> find_exclusive_changes(const ChangeTimeline& tl_m,
                                                                           const ChangeTimeline& tl_n,
                                                                           const ChangeTimeline& tl_audio,
                                                                           const MapperConfig& cfg);

/// Outcome of voting over one user's exclusive changes; the label goes to the
/// other user.
struct VoteResult {
    std::string source_user; ///< owner of the exclusive changes
    std::string for_user;    ///< receives the label
    std::optional<ActivityLabel> label;
    int votes = 0;
    int total = 0;   ///< in-set votes cast
    int queried = 0; ///< exclusive changes classified
    double confidence_sum = 0.0;
    std::vector<std::optional<LabelConfidence>> per_entry;

    bool decided() const noexcept { return label.has_value(); }
};

/// Audio window classified for one exclusive change: the IMU change shifted
/// by the adjust windows, widened to at least one second and kept inside the
/// audio extent.
Interval gap_query_window(const ExclusiveChange& e, const Interval& audio_span, const MapperConfig& cfg);

VoteResult vote_activity_for_other(const ExclusiveChangeList& list, const std::string& other_user,
                                   const HarBackend& backend, const AudioStream& audio,
                                   const LabelSpace& primary_set, const MapperConfig& cfg);

struct Assignment {
    std::optional<ActivityLabel> label;
    int votes = 0;
    int total = 0;

    bool decided() const noexcept { return label.has_value(); }
};

struct UserActivityMap {
    std::map<std::string, Assignment> assignments;
    bool conflict = false;          ///< both votes produced the same label
    bool conflict_resolved = false; ///< conflict settled by the opportunistic user
    std::optional<std::string> opportunistic_user;

    const Assignment& at(const std::string& user) const { return assignments.at(user); }
};

/// Combines both vote results. When both users receive the same label the
/// decision derived from the opportunistic user's list (the one with more
/// exclusive changes) is kept and the opportunistic user stays undecided; equal
/// list sizes leave both undecided.
UserActivityMap resolve(const VoteResult& vote_from_m, const VoteResult& vote_from_n, std::size_t exclusive_m,
                        std::size_t exclusive_n, const MapperConfig& cfg = {}, const LabelSpace& labels = {});

} // namespace gapsense
