#include "mmalign/params.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mmalign/error.h"

namespace mmalign {

namespace fs = std::filesystem;

void ParameterStore::Add(const std::string& name, Tensor value) {
  if (Has(name)) throw UsageError("duplicate parameter " + name);
  index_[name] = size();
  names_.push_back(name);
  values_.push_back(std::move(value));
}

const Tensor& ParameterStore::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw UsageError("unknown parameter " + name);
  return values_[it->second];
}

Tensor& ParameterStore::Mutable(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw UsageError("unknown parameter " + name);
  return values_[it->second];
}

int64_t ParameterStore::num_scalars() const {
  int64_t n = 0;
  for (const Tensor& t : values_) n += t.size();
  return n;
}

BoundParameters::BoundParameters(Tape& tape, const ParameterStore& store,
                                 bool requires_grad) {
  for (const std::string& name : store.names()) {
    vars_[name] = tape.Leaf(store.Get(name), requires_grad);
  }
}

Var BoundParameters::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw UsageError("unbound parameter " + name);
  return it->second;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "parameter dump assumes a little-endian host");

uint32_t Crc(const std::string& bytes) {
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
            static_cast<uInt>(bytes.size())));
}

}  // namespace

void SaveParameters(const ParameterStore& store, const fs::path& dump,
                    const fs::path& manifest) {
  std::string payload;
  nlohmann::json entries = nlohmann::json::array();
  int64_t offset = 0;
  for (const std::string& name : store.names()) {
    const Tensor& t = store.Get(name);
    for (Scalar v : t.data()) {
      const double d = static_cast<double>(v);
      char buf[sizeof(double)];
      std::memcpy(buf, &d, sizeof(double));
      payload.append(buf, sizeof(double));
    }
    entries.push_back({{"name", name},
                       {"shape", t.shape()},
                       {"offset", offset},
                       {"count", t.size()}});
    offset += t.size();
  }
  {
    std::ofstream out(dump, std::ios::binary);
    if (!out) throw DataError("cannot write " + dump.string());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
  nlohmann::json doc = {{"format", "float64-le"},
                        {"scalars", offset},
                        {"bytes", payload.size()},
                        {"crc32", Crc(payload)},
                        {"tensors", entries}};
  std::ofstream out(manifest);
  if (!out) throw DataError("cannot write " + manifest.string());
  out << doc.dump(2) << "\n";
}

ParameterStore LoadParameters(const fs::path& dump, const fs::path& manifest) {
  nlohmann::json doc;
  {
    std::ifstream in(manifest);
    if (!in) throw DataError("cannot open " + manifest.string());
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(manifest.string() + ": " + e.what());
    }
  }
  std::string payload;
  {
    std::ifstream in(dump, std::ios::binary);
    if (!in) throw DataError("cannot open " + dump.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    payload = buf.str();
  }
  try {
    if (doc.at("format") != "float64-le") {
      throw DataError(manifest.string() + ": unsupported format");
    }
    if (payload.size() != doc.at("bytes").get<size_t>()) {
      throw DataError(dump.string() + ": size mismatch with manifest");
    }
    if (Crc(payload) != doc.at("crc32").get<uint32_t>()) {
      throw DataError(dump.string() + ": checksum mismatch (corrupted dump)");
    }
    ParameterStore store;
    for (const auto& entry : doc.at("tensors")) {
      Shape shape = entry.at("shape").get<Shape>();
      const int64_t offset = entry.at("offset").get<int64_t>();
      const int64_t count = entry.at("count").get<int64_t>();
      if (ShapeSize(shape) != count ||
          (offset + count) * int64_t(sizeof(double)) >
              static_cast<int64_t>(payload.size())) {
        throw DataError(manifest.string() + ": bad entry " +
                        entry.at("name").get<std::string>());
      }
      std::vector<Scalar> data(count);
      for (int64_t i = 0; i < count; ++i) {
        double d;
        std::memcpy(&d, payload.data() + (offset + i) * sizeof(double),
                    sizeof(double));
        data[i] = static_cast<Scalar>(d);
      }
      store.Add(entry.at("name").get<std::string>(),
                Tensor(std::move(shape), std::move(data)));
    }
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest.string() + ": " + e.what());
  }
}

}  // namespace mmalign
