#include "doctest.h"

#include "bevmotion/config.hpp"

using namespace bevmotion;

TEST_CASE("defaults parse into a valid run config") {
    const RunConfig cfg = config_from_kv(default_config_kv());
    CHECK(cfg.scene.grid.rows() == 64);
    CHECK(cfg.train.weights.alpha == 0.05);
    CHECK(cfg.train.weights.beta == 1.0);
    CHECK(cfg.train.weights.gamma == 0.1);
    CHECK(cfg.train.weights.sigma == 0.2);
    CHECK(cfg.train.adam.learning_rate == 0.004);
    CHECK(cfg.train.net.t_in == 5);
}

TEST_CASE("unknown keys are rejected") {
    KvMap overrides;
    overrides.set("train.eposh", "3");  // typo
    CHECK_THROWS_AS(merge_config_kv(overrides), Error);
    try {
        merge_config_kv(overrides);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
}

TEST_CASE("overrides win over defaults") {
    KvMap overrides;
    overrides.set("train.epochs", "3");
    overrides.set("loss.alpha", "0.25");
    const RunConfig cfg = config_from_kv(merge_config_kv(overrides));
    CHECK(cfg.train.epochs == 3);
    CHECK(cfg.train.weights.alpha == 0.25);
}

TEST_CASE("invalid values are config errors") {
    SUBCASE("non-numeric") {
        KvMap overrides;
        overrides.set("train.epochs", "three");
        CHECK_THROWS_AS(config_from_kv(merge_config_kv(overrides)), Error);
    }
    SUBCASE("out of domain") {
        KvMap overrides;
        overrides.set("train.epochs", "0");
        CHECK_THROWS_AS(config_from_kv(merge_config_kv(overrides)), Error);
    }
    SUBCASE("bad smoothness kind") {
        KvMap overrides;
        overrides.set("train.smoothness", "laplacian");
        CHECK_THROWS_AS(config_from_kv(merge_config_kv(overrides)), Error);
    }
}

TEST_CASE("hash is order-insensitive and value-sensitive") {
    KvMap a;
    a.set("train.epochs", "4");
    a.set("loss.alpha", "0.1");
    KvMap b;
    b.set("loss.alpha", "0.1");
    b.set("train.epochs", "4");
    CHECK(config_hash(merge_config_kv(a)) == config_hash(merge_config_kv(b)));

    KvMap c;
    c.set("train.epochs", "5");
    c.set("loss.alpha", "0.1");
    CHECK(config_hash(merge_config_kv(a)) != config_hash(merge_config_kv(c)));
    CHECK(config_hash(merge_config_kv(a)).size() == 16);
}

TEST_CASE("kv parser handles comments and rejects malformed lines") {
    const KvMap kv = KvMap::parse("# comment\nkey = value  # trailing\n\nother = 2\n");
    CHECK(kv.get_string("key") == "value");
    CHECK(kv.get_int("other") == 2);
    CHECK_THROWS_AS(KvMap::parse("no equals sign here\n"), Error);
}
