#pragma once

#include <stdexcept>
#include <string>

namespace tpa {

// Bad caller input (empty trace list, k <= 0, size mismatch, ...).
class argument_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A formula was evaluated outside the range where it is valid.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Normal-approximation interval requested with no events observed.
class degenerate_interval_error : public domain_error {
 public:
  using domain_error::domain_error;
};

// Capability missing: no oracle, no registered sampler, enumeration cap hit.
class unsupported_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Base for violations of the conditional-sampler contract.
class sampler_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The sampler returned beta_next >= beta (or NaN).
class corrupt_sampler_error : public sampler_error {
 public:
  using sampler_error::sampler_error;
};

// A single run exceeded its step cap.
class runaway_error : public sampler_error {
 public:
  using sampler_error::sampler_error;
};

}  // namespace tpa
