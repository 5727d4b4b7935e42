#include "pfr/net/checkpoint.hpp"
#include "pfr/error.hpp"
#include "pfr/io/binary.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace pfr::net {

namespace {

constexpr char kMagic[8] = {'P', 'F', 'R', 'N', 'E', 'T', '0', '1'};

struct Parsed
{
  Checkpoint meta;
  nlohmann::json tensors;
  std::size_t payload = 0;
};

Parsed parse(std::vector<char> const &bytes, std::string const &path)
{
  if (bytes.size() < 12 || !std::equal(kMagic, kMagic + 8, bytes.begin())) {
    throw FormatError(fmt::format("'{}' is not a model checkpoint", path));
  }
  std::size_t const n = io::get_u32(bytes.data() + 8);
  if (bytes.size() < 12 + n) {
    throw TruncatedFile(fmt::format("checkpoint header needs {} bytes, file has {}", 12 + n, bytes.size()));
  }
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + static_cast<std::ptrdiff_t>(n));
  } catch (nlohmann::json::exception const &e) {
    throw FormatError(fmt::format("checkpoint header is not valid JSON: {}", e.what()));
  }
  Parsed p;
  try {
    p.meta.config.strategy = parse_strategy(h.at("strategy").get<std::string>());
    p.meta.config.iterations = h.at("K").get<int>();
    p.meta.config.depth = h.at("G").get<int>();
    p.meta.config.features = h.at("F").get<int>();
    p.meta.config.aggregation = parse_aggregation(h.at("aggregation").get<std::string>());
    p.meta.config.lambda = h.value("lambda", 0.0);
    p.meta.pff = PfFactor::parse(h.at("pff").get<std::string>());
    p.tensors = h.at("tensors");
  } catch (nlohmann::json::exception const &e) {
    throw FormatError(fmt::format("checkpoint header incomplete: {}", e.what()));
  }
  p.payload = 12 + n;
  return p;
}

} // namespace

template <typename T>
void save_checkpoint(std::filesystem::path const &path, UnrolledNetwork<T> const &net, PfFactor pff)
{
  auto const &cfg = net.config();
  nlohmann::json h;
  h["strategy"] = to_string(cfg.strategy);
  h["K"] = cfg.iterations;
  h["G"] = cfg.depth;
  h["F"] = cfg.features;
  h["aggregation"] = to_string(cfg.aggregation);
  h["pff"] = pff.str();
  h["lambda"] = cfg.lambda;
  h["tensors"] = nlohmann::json::array();
  auto const params = net.parameters();
  for (auto const *p : params) {
    h["tensors"].push_back({{"name", p->name}, {"shape", p->shape}});
  }
  std::string const header = h.dump();
  std::vector<char> bytes(kMagic, kMagic + 8);
  io::put_u32(bytes, static_cast<std::uint32_t>(header.size()));
  bytes.insert(bytes.end(), header.begin(), header.end());
  for (auto const *p : params) {
    for (Index i = 0; i < p->value.size(); ++i) {
      io::put_f32(bytes, static_cast<float>(p->value.data()[i]));
    }
  }
  io::write_file(path.string(), bytes);
}

Checkpoint read_checkpoint_header(std::filesystem::path const &path)
{
  return parse(io::read_file(path.string()), path.string()).meta;
}

template <typename T>
UnrolledNetwork<T> load_checkpoint(std::filesystem::path const &path, Checkpoint *meta)
{
  auto const bytes = io::read_file(path.string());
  auto const p = parse(bytes, path.string());
  UnrolledNetwork<T> net(p.meta.config);
  auto params = net.parameters();
  if (p.tensors.size() != params.size()) {
    throw FormatError(fmt::format("checkpoint holds {} tensors, configuration needs {}", p.tensors.size(), params.size()));
  }
  std::size_t offset = p.payload;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto *param = params[i];
    auto const name = p.tensors[i].at("name").get<std::string>();
    auto const shape = p.tensors[i].at("shape").get<std::vector<Index>>();
    if (name != param->name || shape != param->shape) {
      throw FormatError(fmt::format("checkpoint tensor {} is '{}', expected '{}'", i, name, param->name));
    }
    std::size_t const need = static_cast<std::size_t>(param->value.size()) * 4;
    if (bytes.size() < offset + need) {
      throw TruncatedFile(fmt::format("checkpoint payload needs {} bytes, file has {}", offset + need, bytes.size()));
    }
    for (Index j = 0; j < param->value.size(); ++j) {
      param->value.data()[j] = static_cast<T>(io::get_f32(bytes.data() + offset + 4 * j));
    }
    offset += need;
  }
  if (offset != bytes.size()) { throw FormatError("checkpoint has trailing bytes"); }
  if (meta) { *meta = p.meta; }
  return net;
}

template void save_checkpoint<float>(std::filesystem::path const &, UnrolledNetwork<float> const &, PfFactor);
template void save_checkpoint<double>(std::filesystem::path const &, UnrolledNetwork<double> const &, PfFactor);
template UnrolledNetwork<float> load_checkpoint<float>(std::filesystem::path const &, Checkpoint *);
template UnrolledNetwork<double> load_checkpoint<double>(std::filesystem::path const &, Checkpoint *);

} // namespace pfr::net
