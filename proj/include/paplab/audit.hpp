#pragma once

#include <cstddef>

namespace paplab::audit {

// Counts secret-key reads made while adversary code is on the stack.
// Honest entities read keys freely; the counter only advances inside an
// AdversaryScope on the current thread.
class AdversaryScope {
 public:
  AdversaryScope() noexcept;
  ~AdversaryScope();
  AdversaryScope(const AdversaryScope&) = delete;
  AdversaryScope& operator=(const AdversaryScope&) = delete;

  /// Key reads observed since this scope was opened (nested scopes included).
  std::size_t key_reads() const noexcept;

 private:
  std::size_t start_;
};

// Suspends an enclosing AdversaryScope while an honest entity computes on
// the adversary's behalf (e.g. a legitimate reader answering a relayed frame).
class HonestScope {
 public:
  HonestScope() noexcept;
  ~HonestScope();
  HonestScope(const HonestScope&) = delete;
  HonestScope& operator=(const HonestScope&) = delete;

 private:
  int saved_depth_;
};

void note_key_read() noexcept;

bool in_adversary_scope() noexcept;

}  // namespace paplab::audit
