#include "paplab/audit.hpp"

namespace paplab::audit {
namespace {

struct Counter {
  int depth = 0;
  std::size_t reads = 0;
};

thread_local Counter tls_counter;

}  // namespace

AdversaryScope::AdversaryScope() noexcept : start_(tls_counter.reads) { ++tls_counter.depth; }

AdversaryScope::~AdversaryScope() { --tls_counter.depth; }

std::size_t AdversaryScope::key_reads() const noexcept { return tls_counter.reads - start_; }

HonestScope::HonestScope() noexcept : saved_depth_(tls_counter.depth) { tls_counter.depth = 0; }

HonestScope::~HonestScope() { tls_counter.depth = saved_depth_; }

void note_key_read() noexcept {
  if (tls_counter.depth > 0) ++tls_counter.reads;
}

bool in_adversary_scope() noexcept { return tls_counter.depth > 0; }

}  // namespace paplab::audit
