#include "cgldpc/kernels.hpp"

namespace cgldpc::kernels {

#if !(defined(__x86_64__) || defined(_M_X64))
const Ops* avx2_ops() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* resolve(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &scalar_ops();
    case Backend::Avx2:
      return cpu_has_avx2() ? avx2_ops() : nullptr;
    case Backend::Auto:
      if (cpu_has_avx2())
        if (const Ops* v = avx2_ops()) return v;
      return &scalar_ops();
  }
  return nullptr;
}

const Ops*& current() {
  static const Ops* ops = resolve(Backend::Auto);
  return ops;
}

}  // namespace

const Ops& active() { return *current(); }

std::string_view active_name() { return active().name; }

bool available(Backend b) { return resolve(b) != nullptr; }

bool select(Backend b) {
  const Ops* ops = resolve(b);
  if (!ops) return false;
  current() = ops;
  return true;
}

}  // namespace cgldpc::kernels
