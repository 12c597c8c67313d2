#include <doctest.h>

#include "nlnl/config.hpp"
#include "nlnl/error.hpp"

using namespace nlnl;

namespace {

std::string config_field(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("an empty config yields the defaults") {
  const auto c = parse_config("");
  CHECK(c.seed == 1);
  CHECK(c.dataset.kind == "blobs");
  CHECK(c.dataset.blobs.classes == 4);
  CHECK(c.hidden == std::vector<std::size_t>{64, 64});
  CHECK(c.phases == std::vector<PhaseKind>{PhaseKind::NL, PhaseKind::SelNL, PhaseKind::SelPL});
  CHECK(c.gamma == 0.5);
  CHECK(c.batch_size == 128);
  CHECK(c.nl.learning_rate == 0.02);
  CHECK(c.selpl.learning_rate == 0.1);
  CHECK(c.pseudo.clean_train.decay_epochs == std::vector<std::size_t>{20, 30});
  CHECK(c.baseline.epochs == 150);
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"bench30", "bench45", "bench50", "mnist_fc2", "mnist_asymm", "smoke"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(std::string(NLNL_CONFIG_DIR) + "/" + name + ".cfg"));
  }
  const auto b = load_config(std::string(NLNL_CONFIG_DIR) + "/bench30.cfg");
  CHECK(b.noise.ratio == 0.3);
  CHECK(b.dataset.blobs.per_class == 625);
  const auto m = load_config(std::string(NLNL_CONFIG_DIR) + "/mnist_asymm.cfg");
  CHECK(m.noise.kind == NoiseKind::asymm);
  CHECK(m.noise.asymm_map->at(7) == 1);
}

TEST_CASE("resolved phase settings carry the shared optimizer fields") {
  const auto c = parse_config("[optimizer]\nbatch_size = 32\nmomentum = 0.5\n[selnlpl]\ngamma = 0.6\n"
                              "complementary_labels = 3\n");
  const auto phases = c.phase_configs();
  REQUIRE(phases.size() == 3);
  for (const auto& p : phases) {
    CHECK(p.batch_size == 32);
    CHECK(p.momentum == 0.5);
  }
  CHECK(phases[0].complementary_labels == 3);
  CHECK(phases[2].gamma == 0.6);
  CHECK(c.baseline_config().batch_size == 32);
  CHECK(c.pseudo_configs().final_train.batch_size == 32);
}

TEST_CASE("errors name the offending field") {
  CHECK(config_field("[noise]\nratio = 1.5\n") == "noise.ratio");
  CHECK(config_field("[noise]\nratio = lots\n") == "noise.ratio");
  CHECK(config_field("[noise]\nrate = 0.3\n") == "noise.rate");
  CHECK(config_field("[noize]\nratio = 0.3\n") == "noize");
  CHECK(config_field("seeed = 3\n") == "seeed");
  CHECK(config_field("[noise]\nkind = asymm\nratio = 0.2\n") == "noise.map");
  CHECK(config_field("[selnlpl]\nphases = NL,Foo\n") == "selnlpl.phases");
  CHECK(config_field("[selnlpl]\ngamma = 1\n") == "selnlpl.gamma");
  CHECK(config_field("[optimizer]\nbatch_size = -4\n") == "optimizer.batch_size");
  CHECK(config_field("[nl]\nepochs = 0\n") == "nl.epochs");
  CHECK(config_field("[pseudo]\nenabled = maybe\n") == "pseudo.enabled");
  CHECK(config_field("[dataset]\nkind = idx\n") == "dataset.train_images");
  CHECK(config_field("[report]\nhistogram_bins = 1\n") == "report.histogram_bins");
}

TEST_CASE("inline comments are ignored") {
  const auto c = parse_config("seed = 9 ; the seed\n[noise]\nratio = 0.25 # quarter\n");
  CHECK(c.seed == 9);
  CHECK(c.noise.ratio == 0.25);
}

TEST_CASE("to_config_text round-trips") {
  const auto c = parse_config("seed = 77\n[noise]\nkind = asymm\nratio = 0.4\nmap = cifar10\n"
                              "[network]\nhidden = 32,16,8\n[selnlpl]\nphases = NL,SelPL\n"
                              "[pseudo]\nenabled = false\ndecay_at = 5\n");
  const std::string text = to_config_text(c);
  const auto back = parse_config(text);
  CHECK(to_config_text(back) == text);
  CHECK(back.seed == 77);
  CHECK(back.hidden == std::vector<std::size_t>{32, 16, 8});
  CHECK(back.phases == std::vector<PhaseKind>{PhaseKind::NL, PhaseKind::SelPL});
  CHECK(*back.noise.asymm_map == builtin_asymm_map("cifar10"));
  CHECK_FALSE(back.pseudo_enabled);
}

TEST_CASE("missing config file is a config error") {
  CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);
}
