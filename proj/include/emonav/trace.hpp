#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "emonav/env.hpp"

namespace emonav {

enum class TraceFormat { Csv, Jsonl };

TraceFormat trace_format_from_string(const std::string& name);

/// Header line plus one line per trace row. Floats use shortest round-trip
/// formatting, so identical traces serialize to identical bytes.
std::string format_trace(const EpisodeTrace& trace, TraceFormat format);

/// Inverse of format_trace(Jsonl).
EpisodeTrace parse_trace_jsonl(const std::string& text);

/// Writes the formatted trace to `path`. Throws std::runtime_error on I/O failure.
void export_episode(const EpisodeTrace& trace, TraceFormat format, const std::string& path);

EpisodeTrace load_trace_jsonl(const std::string& path);

nlohmann::json to_json(const RewardBreakdown& r);
RewardBreakdown reward_from_json(const nlohmann::json& j);
std::string to_string(IdtSlot slot);
IdtSlot idt_slot_from_string(const std::string& s);

}  // namespace emonav
