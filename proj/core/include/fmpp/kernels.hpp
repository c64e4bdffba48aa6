#pragma once

// Parametric temporal functions of the classic point-process embodiments.
//
//   form  h(t)        g(t, t')
//   MPP   1           1
//   HP    1           exp(-w (t - t'))
//   SCP   t           1
//   MCP   t - t_I     exp(-(t - t')^2 / sigma^2)
//
// h scales the profile features, g weights each past event. The link
// function is always exp() in the learning pipeline, so it is not modelled.

#include <span>
#include <string>
#include <string_view>

#include "fmpp/core.hpp"

namespace fmpp {

enum class KernelForm { MPP, HP, SCP, MCP };

std::string_view to_string(KernelForm form);
/// Accepts "mpp", "hp", "scp", "mcp" in any case; throws ConfigError.
KernelForm parse_kernel_form(std::string_view name);

struct KernelSpec {
  KernelForm form = KernelForm::MCP;
  double decay = 1.0;      // w, HP only
  double bandwidth = 1.0;  // sigma, MCP only

  /// Throws ConfigError when the active hyperparameter is not positive.
  void validate() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// h(t). `last_event` is t_I, the reference time used by MCP.
double modulation(const KernelSpec& spec, double t, double last_event);

/// g(t, t_prev), in (0, 1]. Throws DomainError when t < t_prev.
double decay(const KernelSpec& spec, double t, double t_prev);

/// Median gap between consecutive events across all sequences; 1.0 when
/// no sequence has two events.
double median_inter_event_gap(std::span<const EventSequence> sequences);

}  // namespace fmpp
