#pragma once

#include <string>

#include "syntens/embedding.hpp"
#include "syntens/linalg.hpp"
#include "syntens/vocab.hpp"

namespace syntens {

/// Text embedding file: header line "n d", then one line per word:
/// "word v1 v2 ... vd". Values are printed with round-trip precision.
/// Rows are written in vocabulary id order.
void save_embeddings(const std::string& path, const EmbeddingMatrix& emb,
                     const Vocabulary& vocab);

/// Loads a text embedding file and aligns rows to `vocab` ids. Words in the
/// file that are not in `vocab` are skipped; vocabulary words missing from the
/// file raise DataError.
EmbeddingMatrix load_embeddings(const std::string& path, const Vocabulary& vocab);

/// Binary tensor file, magic "SCT1": d, R, weights, the three factor matrices
/// row-major, the root-bias pairs, and the global bias. Little-endian.
void save_tensor(const std::string& path, const CpTensor& tensor);
CpTensor load_tensor(const std::string& path);

} // namespace syntens
