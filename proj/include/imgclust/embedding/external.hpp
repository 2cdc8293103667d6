#pragma once

#include <filesystem>

#include "imgclust/common/feature_matrix.hpp"
#include "imgclust/embedding/embedder.hpp"

namespace imgclust::embedding {

// Child-process contract for plugging in a real inference stack:
//
//   argv = [command, manifest_path, output_path, dim]
//
// The child runs with the corpus root as its working directory (manifest
// paths are relative to it) and IMGCLUST_CORPUS_ROOT set. It must write a
// vectors file with one row per manifest line, ordinals indexing that
// manifest, and exit 0. Its stdout/stderr are captured to output_path + ".log".
//
// The output is validated before acceptance: row count equals the manifest's
// line count, dim equals config.dim, every ordinal appears once, values are
// finite. Throws RuntimeFailure on a nonzero exit (message carries the
// captured diagnostics) and VectorsFileError on a malformed file; a non-finite
// value names the image id.
FeatureMatrix run_external_embedder(const std::filesystem::path& manifest_path,
                                    const std::filesystem::path& output_path,
                                    const std::filesystem::path& corpus_root,
                                    const EmbedderConfig& config);

}  // namespace imgclust::embedding
