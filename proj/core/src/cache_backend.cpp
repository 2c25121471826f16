#include "capfuse/cache_backend.hpp"

#include <algorithm>

#include "capfuse/bank.hpp"
#include "capfuse/binio.hpp"
#include "capfuse/error.hpp"
#include "capfuse/tsv.hpp"

#include <fstream>

namespace capfuse {

namespace {

void load_bank_rows(const std::filesystem::path& file, std::size_t& dim,
                    std::unordered_map<std::string, std::vector<float>>& rows) {
  const PhraseBank bank = bank_read(file);
  if (dim == 0) dim = bank.dim();
  if (bank.dim() != dim) {
    fail(Errc::dimension_mismatch, file.string() + ": embedding dim " +
                                       std::to_string(bank.dim()) + " vs expected " +
                                       std::to_string(dim));
  }
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const auto row = bank.row(i);
    auto [it, inserted] = rows.emplace(bank.phrase(i), std::vector<float>(row.begin(), row.end()));
    if (!inserted) {
      fail(Errc::duplicate_id, file.string() + ": key \"" + bank.phrase(i) +
                                   "\" already present in this cache");
    }
  }
}

class CacheCaptioner final : public CaptionProvider {
 public:
  explicit CacheCaptioner(std::shared_ptr<CacheStore> store) : store_(std::move(store)) {}
  BackendInfo info() const override { return {"cache-captioner", store_->dir().string()}; }
  std::string caption(const std::string& image_ref) override {
    return store_->caption_for(image_ref);
  }

 private:
  std::shared_ptr<CacheStore> store_;
};

class CacheImageEmbedder final : public ImageEmbedder {
 public:
  explicit CacheImageEmbedder(std::shared_ptr<CacheStore> store) : store_(std::move(store)) {}
  BackendInfo info() const override { return {"cache-image-embedder", store_->dir().string()}; }
  std::size_t dim() const override { return store_->dim(); }
  EmbeddingVector embed(const std::string& image_ref) override {
    return store_->image_embedding(image_ref);
  }

 private:
  std::shared_ptr<CacheStore> store_;
};

class CacheTextEmbedder final : public TextEmbedder {
 public:
  explicit CacheTextEmbedder(std::shared_ptr<CacheStore> store) : store_(std::move(store)) {}
  BackendInfo info() const override { return {"cache-text-embedder", store_->dir().string()}; }
  std::size_t dim() const override { return store_->dim(); }
  EmbeddingVector embed(const std::string& text) override { return store_->text_embedding(text); }

 private:
  std::shared_ptr<CacheStore> store_;
};

}  // namespace

std::shared_ptr<CacheStore> CacheStore::open(const std::filesystem::path& dir,
                                             std::optional<std::size_t> expected_dim) {
  if (!std::filesystem::is_directory(dir)) {
    fail(Errc::io, "cache directory does not exist: " + dir.string());
  }
  auto store = std::shared_ptr<CacheStore>(new CacheStore());
  store->dir_ = dir;

  const auto captions_path = dir / "captions.tsv";
  if (std::filesystem::exists(captions_path)) {
    std::ifstream in(captions_path, std::ios::binary);
    if (!in) fail(Errc::io, "cannot open " + captions_path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto fields = tsv::split(line);
      if (fields.size() != 2) {
        fail(Errc::parse, captions_path.string() + ":" + std::to_string(line_no) +
                              ": expected 2 columns, got " + std::to_string(fields.size()));
      }
      const std::string id = tsv::unescape(fields[0], captions_path.string(), line_no);
      const std::string caption = tsv::unescape(fields[1], captions_path.string(), line_no);
      if (!store->captions_.emplace(id, caption).second) {
        fail(Errc::duplicate_id, captions_path.string() + ":" + std::to_string(line_no) +
                                     ": id \"" + id + "\" repeated");
      }
    }
  }

  std::vector<std::filesystem::path> image_files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("image.") && name.ends_with(".embk")) {
      image_files.push_back(entry.path());
    }
  }
  std::sort(image_files.begin(), image_files.end());
  for (const auto& file : image_files) load_bank_rows(file, store->dim_, store->image_rows_);

  const auto text_path = dir / "text.embk";
  if (std::filesystem::exists(text_path)) load_bank_rows(text_path, store->dim_, store->text_rows_);

  if (expected_dim && store->dim_ != 0 && store->dim_ != *expected_dim) {
    fail(Errc::dimension_mismatch, dir.string() + ": cache embeddings have dim " +
                                       std::to_string(store->dim_) + ", configured D = " +
                                       std::to_string(*expected_dim));
  }
  return store;
}

std::string CacheStore::caption_for(const std::string& id) const {
  const auto it = captions_.find(id);
  if (it == captions_.end()) {
    fail(Errc::missing_entry, "no cached caption for id \"" + id + "\" in " + dir_.string());
  }
  return it->second;
}

EmbeddingVector CacheStore::image_embedding(const std::string& id) const {
  const auto it = image_rows_.find(id);
  if (it == image_rows_.end()) {
    fail(Errc::missing_entry, "no cached image embedding for id \"" + id + "\" in " +
                                  dir_.string());
  }
  return EmbeddingVector(std::vector<double>(it->second.begin(), it->second.end()));
}

EmbeddingVector CacheStore::text_embedding(const std::string& text) const {
  const auto it = text_rows_.find(text);
  if (it == text_rows_.end()) {
    fail(Errc::missing_entry, "no cached text embedding for \"" + text + "\" in " +
                                  dir_.string());
  }
  return EmbeddingVector(std::vector<double>(it->second.begin(), it->second.end()));
}

std::unique_ptr<CaptionProvider> cache_captioner(std::shared_ptr<CacheStore> store) {
  return std::make_unique<CacheCaptioner>(std::move(store));
}

std::unique_ptr<ImageEmbedder> cache_image_embedder(std::shared_ptr<CacheStore> store) {
  return std::make_unique<CacheImageEmbedder>(std::move(store));
}

std::unique_ptr<TextEmbedder> cache_text_embedder(std::shared_ptr<CacheStore> store) {
  return std::make_unique<CacheTextEmbedder>(std::move(store));
}

void write_caption_cache(const std::filesystem::path& dir,
                         const std::vector<std::pair<std::string, std::string>>& captions) {
  std::filesystem::create_directories(dir);
  std::string out;
  for (const auto& [id, caption] : captions) {
    out += tsv::escape(id);
    out.push_back('\t');
    out += tsv::escape(caption);
    out.push_back('\n');
  }
  binio::write_file_atomic(dir / "captions.tsv", out);
}

}  // namespace capfuse
