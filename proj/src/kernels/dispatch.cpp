// Runtime backend selection. Selection is process-wide and sticky so that a
// single run never mixes reduction orders.

#include <cstdlib>
#include <string>

#include "agrignn/errors.hpp"
#include "agrignn/kernels.hpp"

namespace agrignn::kernels {

const Backend* avx2_backend_impl();  // nullptr when not compiled in
const Backend* neon_backend_impl();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Backend* detect() {
  if (const Backend* b = avx2_backend_impl(); b != nullptr && cpu_has_avx2()) return b;
  if (const Backend* b = neon_backend_impl(); b != nullptr) return b;
  return &scalar_backend();
}

const Backend* lookup(const std::string& name) {
  if (name == "auto") return detect();
  if (name == "scalar") return &scalar_backend();
  if (name == "avx2") {
    const Backend* b = avx2_backend_impl();
    if (b == nullptr || !cpu_has_avx2()) throw config_error("kernel backend 'avx2' not available on this CPU");
    return b;
  }
  if (name == "neon") {
    const Backend* b = neon_backend_impl();
    if (b == nullptr) throw config_error("kernel backend 'neon' not available on this CPU");
    return b;
  }
  throw config_error("unknown kernel backend '" + name + "' (expected auto|scalar|avx2|neon)");
}

const Backend*& selected() {
  static const Backend* current = nullptr;
  return current;
}

}  // namespace

const Backend& backend() {
  const Backend*& cur = selected();
  if (cur == nullptr) {
    if (const char* env = std::getenv("AGRIGNN_KERNELS"); env != nullptr && *env != '\0')
      cur = lookup(env);
    else
      cur = detect();
  }
  return *cur;
}

void force_backend(const std::string& name) { selected() = lookup(name); }

std::vector<const Backend*> available_backends() {
  std::vector<const Backend*> out;
  out.push_back(&scalar_backend());
  if (const Backend* b = avx2_backend_impl(); b != nullptr && cpu_has_avx2()) out.push_back(b);
  if (const Backend* b = neon_backend_impl(); b != nullptr) out.push_back(b);
  return out;
}

}  // namespace agrignn::kernels
