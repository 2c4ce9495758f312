#pragma once

namespace seizurenet::net::testing {

// Mutation hooks for verifying that the gradient checker catches broken
// adjoints. Never enabled outside tests and `gradcheck --inject-fault`.
enum class Fault { None, ConvBackwardSign };

void inject_fault(Fault fault);
Fault active_fault();

class ScopedFault {
 public:
  explicit ScopedFault(Fault fault) : previous_(active_fault()) { inject_fault(fault); }
  ~ScopedFault() { inject_fault(previous_); }
  ScopedFault(const ScopedFault&) = delete;
  ScopedFault& operator=(const ScopedFault&) = delete;

 private:
  Fault previous_;
};

}  // namespace seizurenet::net::testing
