#include <doctest.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "imgclust/common/errors.hpp"
#include "imgclust/corpus/corpus.hpp"
#include "imgclust/corpus/image_io.hpp"
#include "imgclust/corpus/manifest.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace imgclust;
using namespace imgclust::corpus;
using imgclust::testing::TempDir;

namespace {

void write_png(const fs::path& p, const Raster& r) { testing::write_bytes(p, encode_png(r)); }

std::size_t count_valid(const std::vector<ImageRecord>& records) {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                [](const ImageRecord& r) { return r.valid(); }));
}

}  // namespace

TEST_CASE("content hashes match standard test vectors") {
  CHECK(hash_string("abc", HashAlgorithm::md5) == "900150983cd24fb0d6963f7d28e17f72");
  CHECK(hash_string("abc", HashAlgorithm::sha256) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK_THROWS_AS(parse_hash_algorithm("sha1"), ValidationError);
}

TEST_CASE("scan of an empty directory yields no records") {
  TempDir dir;
  CHECK(scan_corpus(dir.path()).empty());
}

TEST_CASE("scan of a missing root is fatal") {
  TempDir dir;
  CHECK_THROWS_AS(scan_corpus(dir / "nope"), RuntimeFailure);
}

TEST_CASE("valid png and truncated jpg") {
  TempDir dir;
  write_png(dir / "a.png", testing::noise_raster(64, 64, 1));
  const auto jpeg = encode_jpeg(testing::noise_raster(64, 64, 2));
  const std::vector<std::uint8_t> truncated(jpeg.begin(), jpeg.begin() + static_cast<long>(jpeg.size() / 2));
  testing::write_bytes(dir / "b.jpg", truncated);

  // Independent check of the fixture: the cut file lost its end-of-image marker.
  REQUIRE(jpeg.size() > 4);
  CHECK(jpeg[jpeg.size() - 2] == 0xFF);
  CHECK(jpeg[jpeg.size() - 1] == 0xD9);
  CHECK_FALSE((truncated[truncated.size() - 2] == 0xFF && truncated.back() == 0xD9));

  const auto records = scan_corpus(dir.path());
  REQUIRE(records.size() == 2);
  CHECK(records[0].path == "a.png");
  CHECK(records[0].format == "png");
  CHECK(records[0].width == 64);
  CHECK(records[0].height == 64);
  CHECK_FALSE(records[0].excluded);
  CHECK(records[1].path == "b.jpg");
  CHECK(records[1].format == "invalid");
  CHECK(records[1].excluded);
  CHECK(records[1].exclusion_reason == ExclusionReason::invalid);
  CHECK(records[1].dedup_group_id.empty());
}

TEST_CASE("decoders agree on pixel content across formats") {
  const Raster img = testing::themed_raster(37, 23, 3, 9);

  SUBCASE("png is lossless") {
    const auto decoded = decode_image(encode_png(img));
    REQUIRE(decoded.ok());
    CHECK(decoded.format == ImageFormat::png);
    CHECK(decoded.raster == img);
  }
  SUBCASE("bmp is lossless") {
    const auto decoded = decode_image(encode_bmp(img));
    REQUIRE(decoded.ok());
    CHECK(decoded.format == ImageFormat::bmp);
    CHECK(decoded.raster == img);
  }
  SUBCASE("jpeg decodes with correct geometry") {
    const auto decoded = decode_image(encode_jpeg(img));
    REQUIRE(decoded.ok());
    CHECK(decoded.raster.width == 37);
    CHECK(decoded.raster.height == 23);
  }
  SUBCASE("gif round-trips through an independent encoder") {
    Raster few(40, 30);
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x) {
        auto* p = few.at(x, y);
        // 8 x 6 tiles of distinct colours keeps the palette under 256
        p[0] = static_cast<std::uint8_t>((x / 5) * 30);
        p[1] = static_cast<std::uint8_t>((y / 5) * 40);
        p[2] = static_cast<std::uint8_t>((x + y) % 2 * 255);
      }
    for (bool interlaced : {false, true}) {
      const auto decoded = decode_image(testing::encode_gif(few, interlaced));
      REQUIRE(decoded.ok());
      CHECK(decoded.format == ImageFormat::gif);
      CHECK(decoded.raster == few);
    }
  }
}

TEST_CASE("canonical 1x1 gif with real LZW data") {
  const std::vector<std::uint8_t> gif = {
      'G', 'I', 'F', '8', '9', 'a', 0x01, 0x00, 0x01, 0x00, 0x80, 0x00, 0x00, 0xFF, 0xFF, 0xFF,
      0x00, 0x00, 0x00, '!', 0xF9, 0x04, 0x01, 0x00, 0x00, 0x00, 0x00, ',', 0x00, 0x00, 0x00, 0x00,
      0x01, 0x00, 0x01, 0x00, 0x00, 0x02, 0x02, 'D', 0x01, 0x00, ';'};
  const auto decoded = decode_image(gif);
  REQUIRE(decoded.ok());
  CHECK(decoded.raster.width == 1);
  CHECK(decoded.raster.rgb == std::vector<std::uint8_t>{255, 255, 255});

  const std::vector<std::uint8_t> cut(gif.begin(), gif.begin() + 30);
  CHECK_FALSE(decode_image(cut).ok());
}

TEST_CASE("corrupt inputs are rejected, not half-decoded") {
  const auto png = encode_png(testing::noise_raster(32, 32, 5));
  CHECK_FALSE(decode_image(std::vector<std::uint8_t>(png.begin(), png.begin() + 100)).ok());
  CHECK_FALSE(decode_image(std::vector<std::uint8_t>{}).ok());
  const std::string text = "definitely not an image";
  CHECK_FALSE(decode_image(std::vector<std::uint8_t>(text.begin(), text.end())).ok());
}

TEST_CASE("thumbnails keep aspect ratio within 256 px") {
  const auto thumb = decode_image(render_thumbnail(testing::noise_raster(600, 300, 1)));
  REQUIRE(thumb.ok());
  CHECK(thumb.raster.width == 256);
  CHECK(thumb.raster.height == 128);
  const auto small = decode_image(render_thumbnail(testing::noise_raster(20, 10, 1)));
  CHECK(small.raster.width == 20);
}

TEST_CASE("byte-identical files share hash and group") {
  TempDir dir;
  const auto bytes = encode_png(testing::noise_raster(16, 16, 7));
  testing::write_bytes(dir / "x/one.png", bytes);
  testing::write_bytes(dir / "y/two.PNG", bytes);
  const auto records = scan_corpus(dir.path());
  REQUIRE(records.size() == 2);
  CHECK(records[0].content_hash == records[1].content_hash);
  CHECK(records[0].dedup_group_id == records[1].dedup_group_id);
  CHECK(records[0].image_id != records[1].image_id);
}

TEST_CASE("extension allow-list and recursion") {
  TempDir dir;
  const auto bytes = encode_png(testing::noise_raster(8, 8, 1));
  testing::write_bytes(dir / "top.png", bytes);
  testing::write_bytes(dir / "notes.txt", bytes);
  testing::write_bytes(dir / "sub/deep.png", bytes);
  CHECK(scan_corpus(dir.path()).size() == 2);
  ScanOptions flat;
  flat.recurse = false;
  CHECK(scan_corpus(dir.path(), flat).size() == 1);
}

TEST_CASE("unreadable file is recorded as invalid and the scan continues") {
  if (::geteuid() == 0) return;  // root reads through permissions
  TempDir dir;
  testing::write_bytes(dir / "ok.png", encode_png(testing::noise_raster(8, 8, 1)));
  testing::write_bytes(dir / "locked.png", encode_png(testing::noise_raster(8, 8, 2)));
  fs::permissions(dir / "locked.png", fs::perms::none);
  const auto records = scan_corpus(dir.path());
  REQUIRE(records.size() == 2);
  CHECK(records[0].path == "locked.png");
  CHECK_FALSE(records[0].valid());
  CHECK(records[1].valid());
  fs::permissions(dir / "locked.png", fs::perms::owner_all);
}

TEST_CASE("deduplicate partitions by content") {
  TempDir dir;
  const auto a = encode_png(testing::noise_raster(8, 8, 1));
  const auto b = encode_png(testing::noise_raster(8, 8, 2));
  testing::write_bytes(dir / "c.png", a);
  testing::write_bytes(dir / "a.png", a);
  testing::write_bytes(dir / "b.png", b);
  const auto records = scan_corpus(dir.path());
  const auto groups = deduplicate(records);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].frequency == 2);
  CHECK(groups[1].frequency == 1);
  // Representative is the lexicographically smallest path.
  CHECK(groups[0].representative_image_id == image_id_for_path("a.png"));

  SUBCASE("N distinct files give N singletons") {
    TempDir d2;
    for (int i = 0; i < 6; ++i) {
      testing::write_bytes(d2 / ("f" + std::to_string(i) + ".png"), encode_png(testing::noise_raster(8, 8, 100 + i)));
    }
    const auto g2 = deduplicate(scan_corpus(d2.path()));
    CHECK(g2.size() == 6);
    CHECK(std::all_of(g2.begin(), g2.end(), [](const DedupGroup& g) { return g.frequency == 1; }));
  }
  CHECK(deduplicate({}).empty());
}

TEST_CASE("dedup of 10 files with 3 duplicate pairs matches pairwise byte comparison") {
  TempDir dir;
  std::vector<fs::path> files;
  int name = 0;
  auto put = [&](const std::vector<std::uint8_t>& bytes) {
    files.push_back(dir / ("img" + std::to_string(name++) + ".png"));
    testing::write_bytes(files.back(), bytes);
  };
  for (int pair = 0; pair < 3; ++pair) {
    const auto bytes = encode_png(testing::noise_raster(8, 8, 50 + pair));
    put(bytes);
    put(bytes);
  }
  for (int single = 0; single < 4; ++single) put(encode_png(testing::noise_raster(8, 8, 80 + single)));

  const auto oracle = testing::byte_equal_group_sizes(files);
  CHECK(oracle.size() == 7);
  const auto groups = deduplicate(scan_corpus(dir.path()));
  std::vector<std::size_t> sizes;
  for (const auto& g : groups) sizes.push_back(g.frequency);
  CHECK(sizes == oracle);
}

TEST_CASE("frequency tally ranks the repeated logo first") {
  TempDir dir;
  const auto logo = encode_png(testing::noise_raster(8, 8, 999));
  std::vector<fs::path> files;
  for (int i = 0; i < 500; ++i) {
    files.push_back(dir / ("logos/l" + std::to_string(i) + ".png"));
    testing::write_bytes(files.back(), logo);
  }
  for (int i = 0; i < 20; ++i) {
    files.push_back(dir / ("photos/p" + std::to_string(i) + ".png"));
    testing::write_bytes(files.back(), encode_png(testing::noise_raster(8, 8, static_cast<std::uint32_t>(i))));
  }
  const auto oracle = testing::byte_equal_group_sizes(files);
  REQUIRE(oracle.front() == 500);

  const auto records = scan_corpus(dir.path());
  const auto groups = deduplicate(records);
  const auto tally = tally_frequencies(groups, records);
  REQUIRE(tally.size() == 21);
  CHECK(tally[0].frequency == oracle.front());
  CHECK(tally[0].content_hash == hash_bytes(logo, HashAlgorithm::sha256));
  CHECK(tally[0].byte_size == logo.size());
  CHECK(tally[0].sample_path == "logos/l0.png");
  for (std::size_t i = 1; i < tally.size(); ++i) {
    CHECK(tally[i].frequency == 1);
    if (i > 1) CHECK(tally[i - 1].content_hash < tally[i].content_hash);
  }

  SUBCASE("threshold exclusion marks all 500 copies") {
    const auto excluded = exclude_high_frequency(records, groups, ExclusionCriterion::threshold(100));
    const auto n = std::count_if(excluded.begin(), excluded.end(), [](const ImageRecord& r) {
      return r.exclusion_reason == ExclusionReason::high_frequency;
    });
    CHECK(static_cast<std::size_t>(n) == oracle.front());
    CHECK(excluded.size() == records.size());
    CHECK(exclude_high_frequency(excluded, groups, ExclusionCriterion::threshold(100)) == excluded);
  }
  SUBCASE("explicit hash list") {
    const auto excluded =
        exclude_high_frequency(records, groups, ExclusionCriterion::hashes({tally[0].content_hash}));
    CHECK(count_records(excluded).excluded_high_frequency == 500);
    CHECK(exclude_high_frequency(records, groups, ExclusionCriterion::hashes({})) == records);
  }
  SUBCASE("md5 mode tallies the same frequencies") {
    ScanOptions md5;
    md5.hash = HashAlgorithm::md5;
    const auto r2 = scan_corpus(dir.path(), md5);
    const auto t2 = tally_frequencies(deduplicate(r2), r2);
    CHECK(t2[0].frequency == 500);
    CHECK(t2[0].content_hash == hash_bytes(logo, HashAlgorithm::md5));
    CHECK(t2[0].content_hash.size() == 32);
  }
}

TEST_CASE("exclusion argument validation") {
  CHECK_THROWS_AS(exclude_high_frequency({}, {}, ExclusionCriterion::threshold(1)), ValidationError);
  CHECK_THROWS_AS(exclude_high_frequency({}, {}, ExclusionCriterion{}), ValidationError);
  CHECK_THROWS_AS(exclude_high_frequency({}, {}, ExclusionCriterion{std::size_t{3}, std::vector<std::string>{}}),
                  ValidationError);
  CHECK(tally_frequencies({}, {}).empty());
}

TEST_CASE("property: partition and conservation over random corpora") {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 5; ++trial) {
    TempDir dir;
    const int distinct = 3 + static_cast<int>(rng() % 6);
    std::vector<std::vector<std::uint8_t>> pool;
    for (int i = 0; i < distinct; ++i) pool.push_back(encode_png(testing::noise_raster(6, 6, rng())));
    const int files = 10 + static_cast<int>(rng() % 20);
    for (int i = 0; i < files; ++i) {
      const auto name = dir / ("d" + std::to_string(rng() % 3) + "/f" + std::to_string(i) + ".png");
      if (rng() % 7 == 0) {
        testing::write_bytes(name, std::vector<std::uint8_t>{1, 2, 3});
      } else {
        testing::write_bytes(name, pool[rng() % pool.size()]);
      }
    }
    const auto records = scan_corpus(dir.path());
    const auto groups = deduplicate(records);
    std::size_t sum = 0;
    std::set<std::string> seen;
    for (const auto& g : groups) {
      CHECK(g.frequency == g.member_ids.size());
      CHECK(std::find(g.member_ids.begin(), g.member_ids.end(), g.representative_image_id) != g.member_ids.end());
      sum += g.frequency;
      for (const auto& m : g.member_ids) CHECK(seen.insert(m).second);
    }
    CHECK(sum == count_valid(records));
    for (std::size_t i = 1; i < groups.size(); ++i) CHECK(groups[i - 1].frequency >= groups[i].frequency);

    const auto excluded = exclude_high_frequency(records, groups, ExclusionCriterion::threshold(3));
    const auto c = count_records(excluded);
    CHECK((c.invalid + c.excluded_high_frequency + c.clusterable) == c.total);
    CHECK(c.total == static_cast<std::size_t>(files));
    for (const auto& r : excluded) CHECK((r.exclusion_reason == ExclusionReason::invalid) == !r.valid());
  }
}

TEST_CASE("manifest and tally files are deterministic and round-trip") {
  TempDir dir;
  const auto bytes = encode_png(testing::noise_raster(8, 8, 3));
  testing::write_bytes(dir / "corpus/a,b.png", bytes);
  testing::write_bytes(dir / "corpus/c.png", bytes);
  testing::write_bytes(dir / "corpus/bad.gif", std::vector<std::uint8_t>{'G', 'I', 'F', '8'});

  const auto first = scan_corpus(dir / "corpus");
  const auto second = scan_corpus(dir / "corpus");
  write_manifest(dir / "m1.jsonl", first);
  write_manifest(dir / "m2.jsonl", second);
  std::ifstream f1(dir / "m1.jsonl"), f2(dir / "m2.jsonl");
  const std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
  CHECK(read_manifest(dir / "m1.jsonl") == first);
  CHECK(s1.find("\"exclusion_reason\":\"invalid\"") != std::string::npos);

  const auto groups = deduplicate(first);
  write_groups(dir / "g.jsonl", groups);
  CHECK(read_groups(dir / "g.jsonl") == groups);

  const auto tally = tally_frequencies(groups, first);
  const std::string csv = tally_csv(tally);
  CHECK(csv.rfind("content_hash,byte_size,frequency,sample_path\n", 0) == 0);
  CHECK(csv.find("\"a,b.png\"") != std::string::npos);
  write_tally(dir / "t.csv", tally);
  CHECK(read_tally(dir / "t.csv") == tally);
}
