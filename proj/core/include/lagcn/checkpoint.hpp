#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lagcn/edge_classifier.hpp"
#include "lagcn/matrix.hpp"
#include "lagcn/models.hpp"

namespace lagcn {

/// Versioned text checkpoint:
///
///   lagcn-checkpoint 1
///   kind <kind>
///   meta <key> <value>          (zero or more)
///   tensor <name> <rows> <cols>
///   <row values, space separated, shortest round-trip decimal>
///   ...
///   end
///
/// Values round-trip exactly.
struct Checkpoint {
    std::string kind;
    std::map<std::string, std::string> meta;
    std::vector<std::pair<std::string, Matrix>> tensors;

    const Matrix& tensor(const std::string& name) const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

Checkpoint to_checkpoint(const EdgeClassifier& c);
Checkpoint to_checkpoint(const SgcModel& m);
Checkpoint to_checkpoint(const GcnModel& m);

EdgeClassifier edge_classifier_from(const Checkpoint& ckpt);
SgcModel sgc_model_from(const Checkpoint& ckpt);
GcnModel gcn_model_from(const Checkpoint& ckpt);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// `id<TAB>class` lines.
void write_predictions(std::ostream& out, const std::vector<int>& predictions);

} // namespace lagcn
