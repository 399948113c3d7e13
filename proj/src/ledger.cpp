#include "lgcn/ledger.hpp"

namespace lgcn {
namespace {

thread_local CostLedger* g_active = nullptr;

}  // namespace

CostLedger* active_ledger() { return g_active; }

LedgerScope::LedgerScope(CostLedger& ledger) : previous_(g_active) {
  g_active = &ledger;
}

LedgerScope::~LedgerScope() { g_active = previous_; }

}  // namespace lgcn
