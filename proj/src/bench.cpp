#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <limits>
#include <set>

#include "clonewatch/aead.hpp"
#include "clonewatch/errors.hpp"
#include "clonewatch/pipeline.hpp"

namespace clonewatch::pipeline {

using nlohmann::json;

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("fit_linear: x and y differ in length");
  LinearFit fit;
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2 || std::set<double>(x.begin(), x.end()).size() < 2) {
    fit.r_squared = std::nan("");
    return fit;
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

namespace {

constexpr int kRounds = 9;

double time_all(std::size_t count, const std::function<void(std::size_t)>& op) {
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < count; ++i) op(i);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Keys, ciphertexts and wrapped keys for one scale.
struct ScaleState {
  ibe::MasterPublicKey mpk;
  ibe::MasterSecretKey msk;
  std::unique_ptr<SeededRandom> rng;
  std::vector<std::string> ids;
  std::vector<Bytes> messages, session_keys, wrapped;
  std::vector<ibe::IdentityPrivateKey> keys;
  std::vector<ibe::Ciphertext> ciphertexts;
};

}  // namespace

BenchReport run_bench(const std::vector<std::size_t>& scales, const PipelineConfig& config) {
  config.validate();
  auto group = ibe::make_pairing_group(config.protocol.backend);
  const int security = config.protocol.security.value_or(group->default_security());
  BenchReport report;
  report.backend = group->name();

  std::vector<ScaleState> states;
  for (std::size_t m : scales) {
    auto rng = std::make_unique<SeededRandom>(derive_seed(config.seed, 7, m));
    auto [mpk, msk] = ibe::setup(security, group, *rng, config.protocol.message_bits);
    ScaleState st{std::move(mpk), std::move(msk), std::move(rng), {}, {}, {}, {}, {}, {}};
    st.ids.resize(m);
    st.messages.resize(m);
    st.session_keys.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      st.ids[i] = "user-" + std::to_string(i);
      st.messages[i] = st.rng->bytes(config.protocol.message_bits / 8);
      st.session_keys[i] = st.rng->bytes(aead::kKeyBytes);
    }
    st.keys.resize(m);
    st.ciphertexts.resize(m);
    st.wrapped.resize(m);
    states.push_back(std::move(st));
  }

  // Whole sweeps repeated, best per scale, so slow machine drift hits each
  // scale in several independent windows.
  std::vector<std::map<std::string, double>> best(states.size());
  std::size_t failures = 0;
  for (int round = 0; round < kRounds; ++round) {
    for (std::size_t s = 0; s < states.size(); ++s) {
      auto& st = states[s];
      const std::size_t m = st.ids.size();
      std::map<std::string, double> seconds;
      seconds["extract"] = time_all(m, [&](std::size_t i) { st.keys[i] = ibe::extract(st.msk, st.mpk, st.ids[i]); });
      seconds["encrypt"] = time_all(
          m, [&](std::size_t i) { st.ciphertexts[i] = ibe::encrypt(st.mpk, st.ids[i], st.messages[i], *st.rng); });
      seconds["decrypt"] = time_all(m, [&](std::size_t i) {
        if (ibe::decrypt(st.mpk, st.keys[i], st.ciphertexts[i]) != st.messages[i]) ++failures;
      });
      seconds["wrap"] = time_all(
          m, [&](std::size_t i) { st.wrapped[i] = aead::wrap(st.session_keys[i], st.keys[i].serialize(), *st.rng); });
      seconds["unwrap"] = time_all(m, [&](std::size_t i) {
        if (!(ibe::IdentityPrivateKey::deserialize(st.mpk, aead::unwrap(st.session_keys[i], st.wrapped[i])) ==
              st.keys[i]))
          ++failures;
      });
      for (const auto& [op, t] : seconds)
        best[s][op] = round == 0 ? t : std::min(best[s][op], t);
      if (failures)
        throw StageError("bench", std::to_string(failures) + " round-trip failures at scale " + std::to_string(m));
    }
  }

  for (std::size_t s = 0; s < states.size(); ++s) {
    BenchRow row;
    row.scale = scales[s];
    row.seconds = best[s];
    std::set<std::string> identities;
    for (const auto& k : states[s].keys) {
      identities.insert(k.identity);
      row.key_storage_bytes += k.serialize().size();
    }
    row.private_keys = states[s].keys.size();
    row.public_identities = identities.size();
    report.rows.push_back(std::move(row));
  }

  std::vector<double> x;
  for (const auto& r : report.rows) x.push_back(static_cast<double>(r.scale));
  for (const char* op : {"extract", "encrypt", "decrypt", "wrap", "unwrap"}) {
    std::vector<double> y;
    for (const auto& r : report.rows) y.push_back(r.seconds.at(op));
    if (x.size() >= 2) report.fits[op] = fit_linear(x, y);
  }
  if (x.size() >= 2) {
    std::vector<double> storage;
    for (const auto& r : report.rows) storage.push_back(static_cast<double>(r.key_storage_bytes));
    report.fits["key_storage_bytes"] = fit_linear(x, storage);
  }
  return report;
}

json BenchReport::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows)
    rows_json.push_back({{"scale", r.scale},
                         {"seconds", r.seconds},
                         {"private_keys", r.private_keys},
                         {"public_identities", r.public_identities},
                         {"key_storage_bytes", r.key_storage_bytes}});
  json fits_json = json::object();
  for (const auto& [op, f] : fits)
    fits_json[op] = {{"intercept", f.intercept},
                     {"slope", f.slope},
                     {"r_squared", std::isnan(f.r_squared) ? json(nullptr) : json(f.r_squared)}};
  return {{"backend", backend}, {"rows", rows_json}, {"fits", fits_json}};
}

}  // namespace clonewatch::pipeline
