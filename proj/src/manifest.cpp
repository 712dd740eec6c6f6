#include "specknet/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "specknet/errors.hpp"

namespace specknet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::filesystem::path resolve(const std::filesystem::path& root, const std::string& p) {
  std::filesystem::path path(p);
  return (path.is_absolute() ? path : root / path).lexically_normal();
}

}  // namespace

std::vector<ManifestEntry> DatasetManifest::sorted_entries() const {
  auto out = entries;
  std::sort(out.begin(), out.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.image_id < b.image_id; });
  return out;
}

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                               const std::string& source) {
  DatasetManifest m;
  m.root = base_dir;
  struct Raw {
    std::string id, noisy, clean;
    int line;
  };
  std::vector<Raw> raws;
  std::set<std::string> ids;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool saw_root = false;
  auto fail = [&](const std::string& msg) {
    throw DataError(source + " line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("root:", 0) == 0) {
      if (saw_root) fail("duplicate root");
      saw_root = true;
      const std::string value = trim(line.substr(5));
      if (value.empty()) fail("empty root");
      m.root = resolve(base_dir, value);
      continue;
    }
    std::istringstream tokens(line);
    std::string keyword;
    tokens >> keyword;
    if (keyword != "entry") fail("expected 'entry' or 'root:', found '" + keyword + "'");
    Raw raw{{}, {}, {}, lineno};
    std::string tok;
    while (tokens >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size()) {
        fail("malformed field '" + tok + "' (expected key=value)");
      }
      const std::string key = tok.substr(0, eq);
      const std::string value = tok.substr(eq + 1);
      std::string* slot = nullptr;
      if (key == "id") slot = &raw.id;
      else if (key == "noisy") slot = &raw.noisy;
      else if (key == "clean") slot = &raw.clean;
      else fail("unknown field '" + key + "'");
      if (!slot->empty()) fail("duplicate field '" + key + "'");
      *slot = value;
    }
    if (raw.id.empty()) fail("missing field 'id'");
    if (raw.noisy.empty()) fail("missing field 'noisy'");
    if (!ids.insert(raw.id).second) fail("duplicate image_id '" + raw.id + "'");
    raws.push_back(std::move(raw));
  }
  if (raws.empty()) throw DataError(source + ": empty manifest");
  for (const Raw& r : raws) {
    ManifestEntry e;
    e.image_id = r.id;
    e.noisy_path = resolve(m.root, r.noisy);
    if (!r.clean.empty()) e.clean_path = resolve(m.root, r.clean);
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  DatasetManifest m = parse_manifest(buffer.str(), path.parent_path(), path.string());
  std::string missing;
  for (const auto& e : m.entries) {
    if (!std::filesystem::exists(e.noisy_path)) missing += "\n  " + e.noisy_path.string();
  }
  if (!missing.empty()) throw DataError(path.string() + ": missing noisy images:" + missing);
  return m;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  const auto dir = std::filesystem::weakly_canonical(std::filesystem::absolute(path).parent_path());
  const bool local = std::filesystem::weakly_canonical(std::filesystem::absolute(manifest.root)) == dir;
  out << "# image manifest\nroot: " << (local ? std::string(".") : manifest.root.string()) << "\n";
  auto rel = [&](const std::filesystem::path& p) {
    return p.lexically_relative(manifest.root).string();
  };
  for (const auto& e : manifest.entries) {
    out << "entry id=" << e.image_id << " noisy=" << rel(e.noisy_path);
    if (e.clean_path) out << " clean=" << rel(*e.clean_path);
    out << "\n";
  }
}

}  // namespace specknet
