#include "imgclust/embedding/external.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <vector>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/text.hpp"
#include "imgclust/corpus/manifest.hpp"
#include "imgclust/embedding/vectors_file.hpp"

namespace fs = std::filesystem;

namespace imgclust::embedding {
namespace {

std::string tail(const std::string& s, std::size_t n = 2000) {
  return s.size() <= n ? s : "..." + s.substr(s.size() - n);
}

int spawn_and_wait(const std::vector<std::string>& argv, const fs::path& cwd, const fs::path& log) {
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const pid_t pid = fork();
  if (pid < 0) throw RuntimeFailure("fork failed");
  if (pid == 0) {
    const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      ::dup2(fd, STDOUT_FILENO);
      ::dup2(fd, STDERR_FILENO);
      ::close(fd);
    }
    if (::chdir(cwd.c_str()) != 0) _exit(126);
    ::setenv("IMGCLUST_CORPUS_ROOT", cwd.c_str(), 1);
    ::execvp(cargv[0], cargv.data());
    _exit(127);
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw RuntimeFailure("waitpid failed");
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace

FeatureMatrix run_external_embedder(const fs::path& manifest_path, const fs::path& output_path,
                                    const fs::path& corpus_root, const EmbedderConfig& config) {
  if (config.external_command.empty()) throw ValidationError("no external embedder command configured");
  if (config.dim < 2) throw ValidationError("embedding dim must be at least 2");
  const auto records = corpus::read_manifest(manifest_path);

  const fs::path manifest_abs = fs::absolute(manifest_path);
  const fs::path output_abs = fs::absolute(output_path);
  const fs::path log = output_abs.string() + ".log";
  std::error_code ec;
  fs::remove(output_abs, ec);

  const int code = spawn_and_wait(
      {config.external_command, manifest_abs.string(), output_abs.string(), std::to_string(config.dim)},
      fs::absolute(corpus_root), log);
  std::string diagnostics;
  try {
    diagnostics = read_file(log.string());
  } catch (const RuntimeFailure&) {
  }
  if (code != 0) {
    throw RuntimeFailure("external embedder '" + config.external_command + "' exited with status " +
                         std::to_string(code) + (diagnostics.empty() ? "" : ": " + tail(diagnostics)));
  }
  if (!fs::exists(output_abs)) {
    throw RuntimeFailure("external embedder exited 0 but wrote no vectors file");
  }

  FeatureMatrix vectors;
  try {
    vectors = read_vectors(output_abs);
  } catch (const VectorsFileError& e) {
    if (e.non_finite() && e.ordinal() && *e.ordinal() < records.size()) {
      throw VectorsFileError("non-finite value in vector for image " + records[*e.ordinal()].image_id,
                             e.byte_offset(), e.ordinal())
          .mark_non_finite();
    }
    throw;
  }
  if (vectors.dim() != config.dim) {
    throw VectorsFileError("vectors file has dim " + std::to_string(vectors.dim()) + ", expected " +
                               std::to_string(config.dim),
                           kVectorsMagic.size());
  }
  if (vectors.rows() != records.size()) {
    throw VectorsFileError("vectors file has " + std::to_string(vectors.rows()) + " rows, manifest has " +
                               std::to_string(records.size()),
                           kVectorsMagic.size());
  }
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    if (vectors.ordinal(i) >= records.size()) {
      const std::size_t header = kVectorsMagic.size() +
                                 ("count=" + std::to_string(vectors.rows()) + " dim=" +
                                  std::to_string(vectors.dim()) + "\n").size();
      throw VectorsFileError("ordinal " + std::to_string(vectors.ordinal(i)) + " outside manifest",
                             header + i * (8 + 4 * vectors.dim()), vectors.ordinal(i));
    }
  }
  if (config.normalize == Normalization::l2) {
    for (std::size_t i = 0; i < vectors.rows(); ++i) l2_normalize(vectors.row(i));
  }
  return vectors;
}

}  // namespace imgclust::embedding
