#include "fmpp/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

namespace fmpp {

std::string_view to_string(KernelForm form) {
  switch (form) {
    case KernelForm::MPP: return "mpp";
    case KernelForm::HP: return "hp";
    case KernelForm::SCP: return "scp";
    case KernelForm::MCP: return "mcp";
  }
  return "?";
}

KernelForm parse_kernel_form(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "mpp") return KernelForm::MPP;
  if (lower == "hp") return KernelForm::HP;
  if (lower == "scp") return KernelForm::SCP;
  if (lower == "mcp") return KernelForm::MCP;
  throw ConfigError("unknown kernel form '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  if (form == KernelForm::HP && !(decay > 0.0 && std::isfinite(decay))) {
    throw ConfigError("Hawkes decay w must be positive");
  }
  if (form == KernelForm::MCP && !(bandwidth > 0.0 && std::isfinite(bandwidth))) {
    throw ConfigError("MCP bandwidth sigma must be positive");
  }
}

double modulation(const KernelSpec& spec, double t, double last_event) {
  switch (spec.form) {
    case KernelForm::MPP:
    case KernelForm::HP:
      return 1.0;
    case KernelForm::SCP:
      return t;
    case KernelForm::MCP:
      if (t < last_event) {
        std::ostringstream msg;
        msg << "MCP modulation evaluated at t=" << t << " before reference time " << last_event;
        throw DomainError(msg.str());
      }
      return t - last_event;
  }
  return 1.0;
}

double decay(const KernelSpec& spec, double t, double t_prev) {
  const double lag = t - t_prev;
  if (lag < 0.0) {
    std::ostringstream msg;
    msg << "kernel evaluated at t=" << t << " before event time " << t_prev;
    throw DomainError(msg.str());
  }
  switch (spec.form) {
    case KernelForm::MPP:
    case KernelForm::SCP:
      return 1.0;
    case KernelForm::HP:
      return std::exp(-spec.decay * lag);
    case KernelForm::MCP:
      return std::exp(-(lag * lag) / (spec.bandwidth * spec.bandwidth));
  }
  return 1.0;
}

double median_inter_event_gap(std::span<const EventSequence> sequences) {
  std::vector<double> gaps;
  for (const auto& seq : sequences) {
    for (std::size_t i = 1; i < seq.events.size(); ++i) {
      gaps.push_back(seq.events[i].t - seq.events[i - 1].t);
    }
  }
  if (gaps.empty()) return 1.0;
  const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  double med = *mid;
  if (gaps.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(gaps.begin(), mid));
  }
  return med > 0.0 ? med : 1.0;
}

}  // namespace fmpp
