#pragma once

#include <string>
#include <string_view>

#include "dbnet/cli.hpp"
#include "dbnet/dsl/elaborate.hpp"
#include "dbnet/equivalence.hpp"
#include "dbnet/fo_oracle.hpp"

namespace dbnet::test {

inline const std::string models = DBNET_MODELS;

inline DbNet dbnet_of(std::string_view text, const dsl::ParamOverrides& params = {}) {
  return dsl::elaborate_dbnet(cli::parse_model(text), params);
}

inline NuCpn cpn_of(std::string_view text) { return dsl::elaborate_cpn(cli::parse_model(text)); }

inline DbNet corpus_net(const std::string& file, const dsl::ParamOverrides& params = {},
                        const std::string& fresh = "recycling") {
  auto m = cli::load_model(models + "/" + file, params);
  m.dbnet->policy.set_mode(fresh);
  return *m.dbnet;
}

inline DbNet shopping_cart(std::int64_t users = 1, std::int64_t products = 1, const std::string& fresh = "recycling") {
  return corpus_net("shopping-cart.dbn", {{"users", users}, {"products", products}}, fresh);
}

inline Value I(std::int64_t v) { return Value::integer(v); }
inline Value S(std::string_view v) { return Value::string(v); }
inline Value R(std::string_view v) { return Value::real(v); }

inline Value typed(const DbNet& net, std::string_view type, std::string_view v) {
  return Value::string(v, net.types().require(type));
}

inline Value null_of(TypeId t) { return Value::null(t); }

}  // namespace dbnet::test
