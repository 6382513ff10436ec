#include "clonewatch/errors.hpp"
#include "clonewatch/protocol.hpp"

namespace clonewatch::protocol {

void SecretLedger::record(std::string field, Bytes secret) {
  if (secret.empty()) throw ValidationError("empty secret for " + field);
  entries_.emplace_back(std::move(field), std::move(secret));
}

bool AuditReport::passed() const {
  for (const auto& f : findings)
    if (f.leaked) return false;
  return true;
}

std::vector<std::string> AuditReport::leaked_fields() const {
  std::vector<std::string> out;
  for (const auto& f : findings)
    if (f.leaked) out.push_back(f.field);
  return out;
}

AuditReport eavesdrop_audit(const std::vector<Bytes>& transcript, const SecretLedger& ledger) {
  std::vector<Bytes> payloads;
  payloads.reserve(transcript.size());
  for (const auto& frame : transcript) {
    try {
      payloads.push_back(decode_frame(frame).payload);
    } catch (const DecodeError&) {
      // Undecodable frames are still scanned raw.
    }
  }
  AuditReport report;
  for (const auto& [field, secret] : ledger.entries()) {
    const std::string b64 = base64_encode(secret);
    const Bytes hex = to_bytes(to_hex(secret));
    bool leaked = false;
    for (const auto& frame : transcript)
      leaked = leaked || contains_bytes(frame, secret) || contains_bytes(frame, to_bytes(b64)) ||
               contains_bytes(frame, hex);
    for (const auto& payload : payloads) leaked = leaked || contains_bytes(payload, secret);
    report.findings.push_back({field, leaked});
  }
  return report;
}

}  // namespace clonewatch::protocol
