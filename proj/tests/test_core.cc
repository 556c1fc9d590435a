#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/adam.h"
#include "core/rng.h"
#include "core/store.h"
#include "core/tape.h"
#include "gradcheck.h"

using namespace msat;

namespace {

Tensor make_tensor(int r, int c, std::initializer_list<double> vals) {
  Tensor t(r, c);
  std::copy(vals.begin(), vals.end(), t.v.begin());
  return t;
}

Tensor random_tensor(int r, int c, Rng& rng, double scale = 1.0) {
  Tensor t(r, c);
  for (double& x : t.v) x = rng.uniform(-scale, scale);
  return t;
}

}  // namespace

TEST_CASE("matmul identity and projection") {
  Tensor eye = make_tensor(2, 2, {1, 0, 0, 1});
  Tensor a = make_tensor(2, 2, {1, 2, 3, 4});
  Tape tape;
  Var out = tape.matmul(tape.constant(eye), tape.constant(a));
  auto v = tape.value(out);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 2.0);
  CHECK(v[2] == 3.0);
  CHECK(v[3] == 4.0);

  Tensor proj = make_tensor(2, 2, {1, 0, 0, 0});
  Tensor x = make_tensor(2, 1, {5, 7});
  Tape tape2;
  auto pv = tape2.value(tape2.matmul(tape2.constant(proj), tape2.constant(x)));
  CHECK(pv[0] == 5.0);
  CHECK(pv[1] == 0.0);
}

TEST_CASE("matmul shape error names both shapes") {
  Tensor a(2, 3), b(2, 2);
  Tape tape;
  Var va = tape.constant(a), vb = tape.constant(b);
  CHECK_THROWS_WITH_AS(tape.matmul(va, vb),
                       doctest::Contains("[2x3]"), ShapeError);
}

TEST_CASE("matmul gradient matches finite differences") {
  Rng rng(7);
  Tensor a = random_tensor(3, 4, rng);
  Tensor b = random_tensor(4, 2, rng);
  auto forward = [&]() {
    Tape t;
    return t.scalar(t.sum(t.matmul(t.param(a), t.param(b))));
  };
  Tape t;
  Var loss = t.sum(t.matmul(t.param(a), t.param(b)));
  t.backward(loss);
  CHECK(test::max_grad_error(forward, {&a, &b}) < 1e-4);
}

TEST_CASE("softmax basics") {
  Tape tape;
  Tensor z = make_tensor(3, 1, {0, 0, 0});
  auto v = tape.value(tape.softmax(tape.constant(z)));
  CHECK(v[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  // shift invariance
  Rng rng(3);
  Tensor x = random_tensor(5, 1, rng, 3.0);
  Tensor xs = x;
  for (double& d : xs.v) d += 17.25;
  Tape t2;
  auto a = t2.value(t2.softmax(t2.constant(x)));
  auto b = t2.value(t2.softmax(t2.constant(xs)));
  for (int i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));

  // hand-evaluated case
  Tensor logs = make_tensor(3, 1, {std::log(1.0), std::log(2.0), std::log(7.0)});
  Tape t3;
  auto p = t3.value(t3.softmax(t3.constant(logs)));
  CHECK(p[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("softmax outputs nonnegative and sum to one on random logits") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + static_cast<int>(rng.index(9));
    Tensor x = random_tensor(n, 1, rng, 20.0);
    Tape t;
    auto v = t.value(t.softmax(t.constant(x)));
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(v[i] >= 0.0);
      s += v[i];
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("empty tensors are rejected") {
  Tape tape;
  CHECK_THROWS_AS(tape.zeros(0, 1), ShapeError);
  CHECK_THROWS_AS(Tensor(0, 3), ShapeError);
}

TEST_CASE("elementwise and structural op values") {
  Tape tape;
  Tensor z = make_tensor(1, 1, {0.0});
  CHECK(tape.value(tape.tanh(tape.constant(z)))[0] == 0.0);

  Tensor a = make_tensor(2, 1, {1, 2});
  Tensor b = make_tensor(1, 1, {3});
  auto cat = tape.value(tape.concat(tape.constant(a), tape.constant(b), 0));
  CHECK(cat[0] == 1.0);
  CHECK(cat[1] == 2.0);
  CHECK(cat[2] == 3.0);
}

TEST_CASE("embedding lookup returns one row and backprops only into it") {
  Rng rng(5);
  Tensor table = random_tensor(5, 32, rng);
  Tape tape;
  Var tv = tape.param(table);
  Var row = tape.embedding_lookup(tv, 2);
  for (int j = 0; j < 32; ++j) CHECK(tape.value(row)[j] == table.at(2, j));
  Var loss = tape.sum(row);
  tape.backward(loss);
  for (int r = 0; r < 5; ++r)
    for (int j = 0; j < 32; ++j)
      CHECK(table.g[static_cast<size_t>(r) * 32 + j] == (r == 2 ? 1.0 : 0.0));

  Tape t2;
  CHECK_THROWS_AS(t2.embedding_lookup(t2.param(table), 5), InputError);
}

TEST_CASE("dropout contracts") {
  Rng rng(123);
  Tensor ones(4, 1);
  fill_constant(ones, 1.0);
  Tape tape;
  Var in = tape.constant(ones);
  // rate 0 and eval mode are identities (same Var back)
  CHECK(tape.dropout(in, 0.0, true, rng).idx == in.idx);
  CHECK(tape.dropout(in, 0.2, false, rng).idx == in.idx);
  CHECK_THROWS_AS(tape.dropout(in, 1.0, true, rng), ConfigError);
}

TEST_CASE("dropout survivor scaling is unbiased (Monte Carlo)") {
  const int kTrials = 100000;
  const int kLen = 100;
  Rng rng(2024);
  Tensor ones(kLen, 1);
  fill_constant(ones, 1.0);
  std::vector<double> mean(kLen, 0.0);
  for (int trial = 0; trial < kTrials; ++trial) {
    Tape tape(4);
    auto v = tape.value(tape.dropout(tape.constant(ones), 0.2, true, rng));
    for (int i = 0; i < kLen; ++i) mean[i] += v[i];
  }
  for (int i = 0; i < kLen; ++i) CHECK(std::abs(mean[i] / kTrials - 1.0) < 0.02);
}

TEST_CASE("backward linear and quadratic cases") {
  Rng rng(42);
  Tensor p = random_tensor(3, 2, rng);
  {
    Tape tape;
    Var loss = tape.sum(tape.param(p));
    tape.backward(loss);
    for (double g : p.g) CHECK(g == 1.0);
  }
  p.zero_grad();
  {
    Tape tape;
    Var vp = tape.param(p);
    tape.backward(tape.sum(tape.mul(vp, vp)));
    for (size_t i = 0; i < p.v.size(); ++i)
      CHECK(p.g[i] == doctest::Approx(2.0 * p.v[i]).epsilon(1e-12));
  }
}

TEST_CASE("backward is single-use and requires a scalar") {
  Rng rng(9);
  Tensor p = random_tensor(2, 2, rng);
  Tape tape;
  Var vp = tape.param(p);
  Var loss = tape.sum(vp);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), StateError);

  Tape t2;
  Var m = t2.param(p);
  CHECK_THROWS_AS(t2.backward(m), ShapeError);
}

TEST_CASE("unreachable parameters keep zero grads") {
  Rng rng(10);
  Tensor used = random_tensor(2, 2, rng);
  Tensor unused = random_tensor(2, 2, rng);
  unused.ensure_grad();
  Tape tape;
  tape.backward(tape.sum(tape.param(used)));
  for (double g : unused.g) CHECK(g == 0.0);
  for (double g : used.g) CHECK(g == 1.0);
}

TEST_CASE("shared parameter accumulates gradient from both uses") {
  Rng rng(12);
  Tensor p = random_tensor(2, 2, rng);
  Tape tape;
  Var a = tape.param(p);
  Var b = tape.param(p);
  CHECK(a.idx == b.idx);  // same leaf
  Var loss = tape.sum(tape.add(a, b));
  tape.backward(loss);
  for (double g : p.g) CHECK(g == 2.0);
}

TEST_CASE("every differentiable op passes a finite-difference check") {
  Rng rng(77);

  struct OpCase {
    const char* name;
    std::function<Var(Tape&, std::vector<Tensor*>&)> build;
    std::vector<Tensor*> params;
  };

  Tensor a = random_tensor(3, 4, rng);
  Tensor b = random_tensor(4, 2, rng);
  Tensor c = random_tensor(3, 4, rng);
  Tensor v3 = random_tensor(3, 1, rng);
  Tensor v4 = random_tensor(4, 1, rng);
  Tensor w4 = random_tensor(4, 1, rng);
  Tensor table = random_tensor(6, 5, rng);
  Tensor logits = random_tensor(7, 1, rng, 2.0);

  std::vector<OpCase> cases;
  cases.push_back({"matmul",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     return t.sum(t.tanh(t.matmul(t.param(*p[0]), t.param(*p[1]))));
                   },
                   {&a, &b}});
  cases.push_back({"add+scale",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     return t.sum(t.tanh(t.scale(t.add(t.param(*p[0]), t.param(*p[1])), 1.7)));
                   },
                   {&a, &c}});
  cases.push_back({"mul",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     return t.sum(t.mul(t.param(*p[0]), t.param(*p[1])));
                   },
                   {&a, &c}});
  cases.push_back({"sigmoid",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     return t.sum(t.sigmoid(t.param(*p[0])));
                   },
                   {&a}});
  cases.push_back({"tanh",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     return t.sum(t.tanh(t.param(*p[0])));
                   },
                   {&a}});
  cases.push_back({"concat0+slice",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     Var cat = t.concat(t.param(*p[0]), t.param(*p[1]), 0);
                     return t.sum(t.tanh(t.slice_rows(cat, 1, 6)));
                   },
                   {&v3, &v4}});
  cases.push_back({"concat1",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     return t.sum(t.tanh(t.concat(t.param(*p[0]), t.param(*p[1]), 1)));
                   },
                   {&a, &c}});
  cases.push_back({"hstack",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     Var m = t.hstack({t.param(*p[0]), t.param(*p[1]), t.param(*p[0])});
                     return t.sum(t.tanh(m));
                   },
                   {&v4, &w4}});
  cases.push_back({"tile_cols",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     return t.sum(t.tanh(t.tile_cols(t.param(*p[0]), 5)));
                   },
                   {&v3}});
  cases.push_back({"embedding",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     Var r2 = t.embedding_lookup(t.param(*p[0]), 2);
                     Var r4 = t.embedding_lookup(t.param(*p[0]), 4);
                     return t.sum(t.tanh(t.add(r2, r4)));
                   },
                   {&table}});
  Tensor w7 = random_tensor(7, 1, rng);
  cases.push_back({"softmax",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     return t.sum(t.mul(t.softmax(t.param(*p[0])), t.param(*p[1])));
                   },
                   {&logits, &w7}});
  cases.push_back({"cross_entropy",
                   [](Tape& t, std::vector<Tensor*>& p) {
                     return t.cross_entropy(t.param(*p[0]), 3);
                   },
                   {&logits}});

  for (auto& oc : cases) {
    CAPTURE(oc.name);
    for (Tensor* t : oc.params) {
      t->ensure_grad();
      t->zero_grad();
    }
    auto forward = [&]() {
      Tape t;
      return t.scalar(oc.build(t, oc.params));
    };
    Tape t;
    Var loss = oc.build(t, oc.params);
    t.backward(loss);
    double err = test::max_grad_error(forward, oc.params);
    CHECK_MESSAGE(err < 1e-4, oc.name << " max rel err " << err);
  }
}

TEST_CASE("dropout gradient with a frozen mask") {
  Rng data_rng(5);
  Tensor x = random_tensor(6, 1, data_rng);
  x.ensure_grad();
  x.zero_grad();
  auto forward = [&]() {
    Rng rng(99);  // same mask every run
    Tape t;
    return t.scalar(t.sum(t.tanh(t.dropout(t.param(x), 0.3, true, rng))));
  };
  Rng rng(99);
  Tape t;
  Var loss = t.sum(t.tanh(t.dropout(t.param(x), 0.3, true, rng)));
  t.backward(loss);
  CHECK(test::max_grad_error(forward, {&x}) < 1e-4);
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
  ParameterStore store;
  Rng rng(1);
  Tensor& p = store.add("w", 3, 3);
  init_glorot(p, rng);
  std::vector<double> before = p.v;
  store.ensure_grads();
  adam_step(store, {});
  CHECK(p.v == before);
}

TEST_CASE("adam first step with unit gradient moves by about -lr") {
  ParameterStore store;
  Tensor& p = store.add("w", 1, 1);
  p.v[0] = 0.5;
  p.ensure_grad();
  p.g[0] = 1.0;
  AdamConfig cfg;  // lr = 2e-4
  adam_step(store, cfg);
  CHECK(p.v[0] == doctest::Approx(0.5 - 2e-4).epsilon(1e-6));
  CHECK(store.step() == 1);
  // grads untouched
  CHECK(p.g[0] == 1.0);
}

TEST_CASE("adam with constant gradient moves monotonically against its sign") {
  ParameterStore store;
  Tensor& p = store.add("w", 1, 1);
  p.v[0] = 0.0;
  p.ensure_grad();
  double prev = 0.0;
  for (int s = 0; s < 2; ++s) {
    p.g[0] = 3.0;
    adam_step(store, {});
    CHECK(p.v[0] < prev);
    prev = p.v[0];
  }
}

TEST_CASE("adam requires grads") {
  ParameterStore store;
  store.add("w", 2, 2);
  CHECK_THROWS_WITH_AS(adam_step(store, {}), doctest::Contains("w"), StateError);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  ParameterStore store;
  Rng rng(31);
  init_glorot(store.add("enc.w", 4, 7), rng);
  init_glorot(store.add("dec.b", 5, 1), rng);
  // touch moments so the resume path is exercised
  store.ensure_grads();
  for (size_t i = 0; i < store.size(); ++i)
    for (double& g : store.tensor(i).g) g = 0.25;
  adam_step(store, {});

  std::string path = (std::filesystem::temp_directory_path() / "msat_ckpt_test.bin").string();
  store.save(path, true);
  ParameterStore back = ParameterStore::load(path);
  REQUIRE(back.size() == store.size());
  CHECK(back.step() == store.step());
  for (size_t i = 0; i < store.size(); ++i) {
    CHECK(back.name(i) == store.name(i));
    CHECK(back.tensor(i).v == store.tensor(i).v);
    CHECK(back.moments(i).m == store.moments(i).m);
    CHECK(back.moments(i).v == store.moments(i).v);
  }
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader reports corruption with a byte offset") {
  std::string path = (std::filesystem::temp_directory_path() / "msat_ckpt_bad.bin").string();
  {
    ParameterStore store;
    Rng rng(8);
    init_glorot(store.add("w", 3, 3), rng);
    store.save(path, false);
  }
  // truncate mid-payload
  std::filesystem::resize_file(path, 30);
  CHECK_THROWS_WITH_AS(ParameterStore::load(path), doctest::Contains("byte offset"),
                       FormatError);
  // corrupt magic
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "XXXXGARBAGE";
  }
  CHECK_THROWS_AS(ParameterStore::load(path), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("duplicate parameter names are rejected") {
  ParameterStore store;
  store.add("w", 1, 1);
  CHECK_THROWS_AS(store.add("w", 2, 2), StateError);
}

TEST_CASE("seeded rng reproduces draws and glorot init bit for bit") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform() == b.uniform());
  Rng c(55), d(55);
  Tensor t1(6, 9), t2(6, 9);
  init_glorot(t1, c);
  init_glorot(t2, d);
  CHECK(t1.v == t2.v);
}
