#include "stcl/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace stcl {

namespace {

std::vector<double> row_major(const Mat& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

Mat from_row_major(const std::vector<double>& data, Index rows, Index cols) {
  if (static_cast<Index>(data.size()) != rows * cols)
    throw std::invalid_argument("io: row-major array has wrong length");
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      m(i, j) = data[static_cast<std::size_t>(i * cols + j)];
  return m;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io: cannot open " + path.string());
  out << content;
  if (!out) throw std::runtime_error("io: write failed for " + path.string());
}

std::string csv_from_matrix(const std::vector<std::string>& header,
                            const Mat& matrix) {
  if (static_cast<Index>(header.size()) != matrix.cols())
    throw std::invalid_argument("csv_from_matrix: header width mismatch");
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) {
      if (j) out += ',';
      out += format_double(matrix(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header, const Mat& matrix) {
  write_text_file(path, csv_from_matrix(header, matrix));
}

Json to_json(const TransitionKernel& kernel) {
  return Json{{"n_states", kernel.n_states},
              {"probs", row_major(kernel.probs)}};
}

TransitionKernel kernel_from_json(const Json& j) {
  TransitionKernel kernel;
  kernel.n_states = j.at("n_states").get<Index>();
  kernel.probs = from_row_major(j.at("probs").get<std::vector<double>>(),
                                kernel.n_states, kernel.n_states);
  validate_kernel(kernel);
  return kernel;
}

Json to_json(const TrajectoryEnsemble& ensemble) {
  return Json{{"seed", ensemble.seed},
              {"kernel_id", ensemble.kernel_id},
              {"sequences", ensemble.sequences}};
}

TrajectoryEnsemble ensemble_from_json(const Json& j) {
  TrajectoryEnsemble ensemble;
  ensemble.seed = j.at("seed").get<std::uint64_t>();
  ensemble.kernel_id = j.at("kernel_id").get<std::string>();
  ensemble.sequences =
      j.at("sequences").get<std::vector<std::vector<Index>>>();
  return ensemble;
}

Json to_json(const Encoder& encoder) {
  return Json{
      {"kind", encoder.kind == Encoder::Kind::Tabular ? "tabular" : "linear"},
      {"rows", encoder.weights.rows()},
      {"cols", encoder.weights.cols()},
      {"weights", row_major(encoder.weights)}};
}

Encoder encoder_from_json(const Json& j) {
  Encoder encoder;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "tabular")
    encoder.kind = Encoder::Kind::Tabular;
  else if (kind == "linear")
    encoder.kind = Encoder::Kind::Linear;
  else
    throw std::invalid_argument("io: unknown encoder kind " + kind);
  encoder.weights = from_row_major(j.at("weights").get<std::vector<double>>(),
                                   j.at("rows").get<Index>(),
                                   j.at("cols").get<Index>());
  return encoder;
}

Json to_json(const StateGraph& graph) {
  return Json{{"n_states", graph.degree.size()},
              {"degree", std::vector<double>(
                             graph.degree.data(),
                             graph.degree.data() + graph.degree.size())},
              {"adjacency", row_major(graph.adjacency)},
              {"norm_adjacency", row_major(graph.norm_adjacency)},
              {"norm_laplacian", row_major(graph.norm_laplacian)}};
}

}  // namespace stcl
