#pragma once

#include "aniframe/config.hpp"

#include "json.hpp"

#include <string>

namespace aniframe {

/// Insertion-ordered so that artifacts are byte-stable.
using Json = nlohmann::ordered_json;

/// {tool, version, config_hash, subcommand}; embedded in every artifact. The
/// config path is left out so that artifacts do not depend on where a run sits.
Json artifact_meta(const RunConfig& c, const std::string& subcommand);
/// Single-line form for CSV comments and binary headers.
std::string artifact_comment(const RunConfig& c, const std::string& subcommand);

Json to_json(const Mat& m);
Json to_json(const DilationInfo& d);
Json to_json(const MolecularReport& r);
Json to_json(const ObstructionReport& r);
Json to_json(const ConjectureFit& f);
Json to_json(const OptimizationResult& r);
Json to_json(const ScalingResult& r);
/// Summary only; rows go to write_embedding_csv.
Json to_json(const EmbeddingReport& r);
/// {q, terms_used, tail_bound, C_M_S, C_M_Sinv, decay_S, decay_Sinv}.
Json neumann_json(const NeumannResult& n, const DualReport& d);
Json failure_json(const std::string& subcommand, const std::string& kind, const std::string& message);

/// Writes body plus a "meta" member, two-space indented, trailing newline.
void write_json(const std::string& path, Json body, const RunConfig& c, const std::string& subcommand);
/// label,lq,hp_proxy,ratio,boundary_fraction
void write_embedding_csv(const std::string& path, const EmbeddingReport& r, const std::string& comment);
/// kappa,M,el_residual,iterations,a11,a22
void write_scaling_csv(const std::string& path, const ScalingResult& r, const std::string& comment);

}  // namespace aniframe
