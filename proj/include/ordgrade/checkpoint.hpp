// Copyright 2026 The ordgrade Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ORDGRADE_CHECKPOINT_HPP_
#define ORDGRADE_CHECKPOINT_HPP_

// Text checkpoint, format version 1:
//
//   ordgrade-checkpoint 1
//   config <RunConfig as one-line JSON>
//   epoch <epochs completed>
//   param <name> <rows> <cols>
//   <rows*cols values, one row per line, shortest round-trip decimal>
//   ... one block per parameter in Model::params() order ...
//   end
//
// Values round-trip exactly, so equal models give byte-identical files. The
// output directory is where a run lives, not part of it: it is stored as the
// default so the same run written to two places gives the same bytes.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ordgrade/config.hpp"
#include "ordgrade/model.hpp"

namespace ordgrade {

inline constexpr const char* kCheckpointMagic = "ordgrade-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  RunConfig config;
  Model model;
  std::size_t epoch = 0;
};

inline void write_checkpoint(std::ostream& out, const RunConfig& cfg, const Model& model,
                             std::size_t epoch) {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  RunConfig stored = cfg;
  stored.out_dir = RunConfig{}.out_dir;
  out << "config " << to_json(stored).dump() << '\n';
  out << "epoch " << epoch << '\n';
  for (const auto& p : model.params()) {
    const Mat& m = *p.value;
    out << "param " << p.name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
      auto row = m.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << ' ';
        out << format_double(row[c]);
      }
      out << '\n';
    }
  }
  out << "end\n";
}

inline void save_checkpoint(const std::filesystem::path& path, const RunConfig& cfg,
                            const Model& model, std::size_t epoch) {
  // Written beside the target and renamed so a crash never leaves half a file.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    write_checkpoint(out, cfg, model, epoch);
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint to '" + path.string() + "': " + ec.message());
}

inline Checkpoint read_checkpoint(std::istream& in, const std::string& where = "checkpoint") {
  auto fail = [&](const std::string& msg) -> IoError { return IoError(where + ": " + msg); };
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != kCheckpointMagic)
    throw fail("not an ordgrade checkpoint");
  if (version != kCheckpointVersion)
    throw fail("unsupported checkpoint version " + std::to_string(version));
  if (!(in >> word) || word != "config") throw fail("missing config line");
  std::string line;
  std::getline(in, line);
  Checkpoint ck;
  try {
    ck.config = config_from_json(nlohmann::json::parse(line));
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("bad config JSON: ") + e.what());
  }
  if (!(in >> word >> ck.epoch) || word != "epoch") throw fail("missing epoch line");

  ck.model = Model::init(ck.config.model, ck.config.metric, Rng(0));
  for (auto& p : ck.model.params()) {
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> word >> name >> rows >> cols) || word != "param")
      throw fail("missing parameter block for " + p.name);
    if (name != p.name) throw fail("expected parameter " + p.name + ", found " + name);
    if (rows != p.value->rows() || cols != p.value->cols()) {
      throw fail("parameter " + name + " has shape " + shape_str(rows, cols) +
                 " but the stored config implies " + shape_str(p.value->rows(), p.value->cols()));
    }
    for (double& v : p.value->values()) {
      if (!(in >> word)) throw fail("truncated values for " + name);
      v = parse_double(word, where + " " + name);
    }
  }
  if (!(in >> word) || word != "end") throw fail("missing end marker");
  return ck;
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in, path.string());
}

}  // namespace ordgrade

#endif  // ORDGRADE_CHECKPOINT_HPP_
