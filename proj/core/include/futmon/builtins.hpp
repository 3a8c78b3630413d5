#pragma once

#include <memory>
#include <string>
#include <vector>

#include "futmon/engine.hpp"

// Library of host-registered behaviors usable from scenario files.
//
// Kinds:
//   wallet            send(to, amount), deposit()
//   conditional-sender send(to) moves 1 token under an undecided monitor
//                      that times out to Fail; an incoming deposit of >= 1
//                      token commits the oldest outstanding send
//   splitter          payout(a, b) pays 1 token to each address
//   flashloan-lender  same-transaction loans guarded by the fail bit
//   lender            loans guarded by a future monitor; timeout fails
//                      transactions with unpaid loans
//   malicious-lender  grants loans but never acknowledges repayment, so the
//                      timeout reverts every lending transaction
//   revoking-lender   lender that can also decide an open loan to Fail via
//                      revoke(t)
//   naive-client      borrow/invest/payBack; always pays back
//   client            as naive-client but tracks its debts and only pays
//                      loans that actually arrived on this timeline
//   market            invest() bounces the deposit back plus a fixed profit
//   flash-borrower    borrowAndRepay()/borrowOnly() against a flash lender

namespace futmon {

inline constexpr Tokens kDefaultMarketProfit = 50;
inline constexpr Tokens kClientInvestThreshold = 200;

// Builds a behavior by kind string; throws ScenarioError on unknown kinds
// or bad parameters. Supported params: market accepts {"profit": N}.
std::shared_ptr<const ContractBehavior> makeBehavior(
    const std::string& kind, const std::map<std::string, std::int64_t>& params = {});

const std::vector<std::string>& builtinKinds();

// Zero-padded storage key ("pending_returns/0000000007") so map order is
// numeric order.
std::string txKey(const std::string& prefix, TxId t);

}  // namespace futmon
