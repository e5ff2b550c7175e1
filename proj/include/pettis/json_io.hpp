// JSON wire formats.  Addresses serialize as 0/1 strings, rationals as
// "p/q"; everything exact stays exact in transit, with decimal
// approximations added alongside for human consumption.
#pragma once

#include "pettis/banach.hpp"
#include "pettis/carving.hpp"
#include "pettis/eval.hpp"
#include "pettis/family.hpp"
#include "pettis/stepfun.hpp"
#include "pettis/verify.hpp"

#include <json.hpp>

#include <string>

namespace pettis {

using Json = nlohmann::ordered_json;

Json selector_to_json(const Selector& s);
Selector selector_from_json(const Json& j);

Json function_to_json(const BasicFunction& f);
BasicFunction function_from_json(const Json& j);

/// Explicit-piece serialization; throws when the set has more pieces than
/// `piece_cap` (deep truncations must stay in run form).
Json carved_set_to_json(const CarvedSet& set, size_t piece_cap = 65536);

Json integral_vector_to_json(const IntegralVector& v);

Json audit_report_to_json(const AuditReport& r);
Json ad_report_to_json(const AdReport& r);
Json pettis_certificate_to_json(const PettisCertificate& c);
Json bochner_report_to_json(const BochnerReport& r);

Json backend_to_json(const NormBackend& b);
NormBackend backend_from_json(const Json& j);

Json schedule_to_json(const BlockSchedule& s);

Json lemma_report_to_json(const LemmaReport& r);
LemmaParams lemma_params_from_json(const Json& j);

Json blowup_witness_to_json(const BlowupWitness& w);

Json quotient_rows_to_json(const std::vector<QuotientRow>& rows);
std::string quotient_rows_to_csv(const std::vector<QuotientRow>& rows);

}  // namespace pettis
