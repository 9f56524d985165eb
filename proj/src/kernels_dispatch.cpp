#include "cvreg/kernels.hpp"

namespace cvreg::kern {

#if (defined(__x86_64__) || defined(_M_X64)) && !defined(CVREG_HAVE_AVX2)
const Ops* avx2_ops() { return nullptr; }
#endif

namespace {

const Ops& best_ops()
{
#if defined(__x86_64__) || defined(_M_X64)
    if (const Ops* t = avx2_ops())
        return *t;
#endif
    return scalar_ops();
}

const Ops* g_active = nullptr;

} // namespace

const Ops& ops()
{
    if (!g_active)
        g_active = &best_ops();
    return *g_active;
}

void select_ops(const Ops& table) { g_active = &table; }
void select_best_ops() { g_active = &best_ops(); }

} // namespace cvreg::kern
