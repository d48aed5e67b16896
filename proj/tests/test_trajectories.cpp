#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <numbers>

#include "support.hpp"

using namespace qtraj;

namespace {

StateVector plus() {
    StateVector psi(2);
    psi << 1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2;
    return psi;
}

ChannelSequence repeated(const KrausChannel& ch, int n) {
    return ChannelSequence(std::vector<KrausChannel>(static_cast<std::size_t>(n), ch));
}

} // namespace

TEST_CASE("evolve_pure") {
    StateVector zero(2);
    zero << 1.0, 0.0;

    SECTION("identity sequence leaves the state alone") {
        PureTrajectory t = evolve_pure(repeated(preset("identity", {}, 2), 3), zero, {0, 0, 0});
        CHECK(t.states.size() == 4);
        for (const StateVector& s : t.states)
            CHECK((s - zero).cwiseAbs().maxCoeff() == 0.0);
        CHECK(t.weight == Catch::Approx(1.0));
    }

    SECTION("complete dephasing projects |+>") {
        PureTrajectory t =
            evolve_pure(repeated(preset("complete_dephasing", {}, 2), 1), plus(), {0});
        CHECK(std::abs(t.states[1][0] - Complex(1.0 / std::numbers::sqrt2, 0.0)) <= 1e-15);
        CHECK(std::abs(t.states[1][1]) == 0.0);
        CHECK(t.weight == Catch::Approx(0.5));
    }

    SECTION("weight equals the re-multiplied matrix product norm") {
        SplitMix64 rng(31);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<KrausChannel> steps;
            for (int k = 0; k < 3; ++k) steps.push_back(support::random_channel(2, 2, rng));
            ChannelSequence seq(steps);
            StateVector psi = support::random_state(2, rng);
            TrajectoryIndex idx = {static_cast<int>(rng.next() % 2),
                                   static_cast<int>(rng.next() % 2),
                                   static_cast<int>(rng.next() % 2)};
            PureTrajectory t = evolve_pure(seq, psi, idx);

            ComplexMatrix product = ComplexMatrix::Identity(2, 2);
            for (int k = 0; k < 3; ++k)
                product = seq.step(k).op(idx[static_cast<std::size_t>(k)]) * product;
            double expected = (product * psi).squaredNorm();
            CHECK(t.weight == Catch::Approx(expected).margin(1e-14));
        }
    }

    SECTION("index validation") {
        ChannelSequence seq = repeated(preset("dephasing", {0.5}, 2), 2);
        CHECK_THROWS_AS(evolve_pure(seq, zero, {0}), InvalidIndex);
        CHECK_THROWS_AS(evolve_pure(seq, zero, {0, 2}), InvalidIndex);
        StateVector unnormalized(2);
        unnormalized << 2.0, 0.0;
        CHECK_THROWS_AS(evolve_pure(seq, unnormalized, {0, 0}), InvalidParameter);
        StateVector wrong_dim(3);
        wrong_dim << 1.0, 0.0, 0.0;
        CHECK_THROWS_AS(evolve_pure(seq, wrong_dim, {0, 0}), DimensionMismatch);
    }
}

TEST_CASE("evolve_mixed") {
    SECTION("identity sequence") {
        DensityOperator rho = DensityOperator::maximally_mixed(2);
        MixedTrajectory t = evolve_mixed(repeated(preset("identity", {}, 2), 2), rho, {0, 0});
        CHECK(t.weight == Catch::Approx(1.0));
    }

    SECTION("pure inputs agree with the lifted vector evolution") {
        SplitMix64 rng(32);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<KrausChannel> steps;
            for (int k = 0; k < 3; ++k) steps.push_back(support::random_channel(2, 2, rng));
            ChannelSequence seq(steps);
            StateVector psi = support::random_state(2, rng);
            TrajectoryIndex idx = {static_cast<int>(rng.next() % 2),
                                   static_cast<int>(rng.next() % 2),
                                   static_cast<int>(rng.next() % 2)};
            PureTrajectory pure = evolve_pure(seq, psi, idx);
            MixedTrajectory mixed = evolve_mixed(seq, DensityOperator::pure(psi), idx);
            for (std::size_t k = 0; k < pure.states.size(); ++k) {
                ComplexMatrix outer = pure.states[k] * pure.states[k].adjoint();
                CHECK((outer - mixed.states[k].matrix()).cwiseAbs().maxCoeff() <= 1e-12);
            }
            CHECK(std::abs(pure.weight - mixed.weight) <= 1e-12);
        }
    }

    SECTION("maximally mixed input under a projector branch") {
        MixedTrajectory t = evolve_mixed(repeated(preset("complete_dephasing", {}, 2), 1),
                                         DensityOperator::maximally_mixed(2), {0});
        ComplexMatrix expected(2, 2);
        expected << 0.5, 0.0, 0.0, 0.0;
        CHECK((t.states[1].matrix() - expected).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK(t.weight == Catch::Approx(0.5));
    }
}

TEST_CASE("enumerate") {
    SECTION("N=1, M=2 gives exactly (0) and (1)") {
        PureEnumeration en = enumerate(repeated(preset("dephasing", {0.3}, 2), 1), plus());
        REQUIRE(en.trajectories.size() == 2);
        CHECK(en.trajectories[0].index == TrajectoryIndex{0});
        CHECK(en.trajectories[1].index == TrajectoryIndex{1});
    }

    SECTION("N=10, M=2: 1024 trajectories, weights sum to one") {
        PureEnumeration en = enumerate(repeated(preset("dephasing", {0.3}, 2), 10), plus());
        CHECK(en.trajectories.size() == 1024);
        CHECK(std::abs(en.total_weight - 1.0) <= 1e-10);
        // lexicographic order
        CHECK(en.trajectories[0].index == TrajectoryIndex{0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
        CHECK(en.trajectories[1].index == TrajectoryIndex{0, 0, 0, 0, 0, 0, 0, 0, 0, 1});
        CHECK(en.trajectories[1023].index == TrajectoryIndex{1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    }

    SECTION("min_weight elides states without touching the accounting") {
        PureEnumeration en = enumerate(repeated(preset("dephasing", {0.3}, 2), 3), plus(), 1.0);
        CHECK(en.elided_count == en.trajectories.size());
        CHECK(en.retained_weight == 0.0);
        CHECK(std::abs(en.total_weight - 1.0) <= 1e-10);
        for (const PureTrajectory& t : en.trajectories) {
            CHECK(t.states_elided);
            CHECK(t.states.empty());
            CHECK(t.weight >= 0.0);
        }
    }

    SECTION("combinatorial overflow is a hard error") {
        CHECK_THROWS_AS(enumerate(repeated(preset("dephasing", {0.3}, 2), 21), plus()),
                        CombinatorialOverflow);
    }
}

TEST_CASE("sample") {
    StateVector zero(2);
    zero << 1.0, 0.0;

    SECTION("identity sequence has a unique outcome") {
        PureTrajectory t = sample(repeated(preset("identity", {}, 2), 4), zero, 99);
        CHECK(t.index == TrajectoryIndex{0, 0, 0, 0});
        CHECK(t.weight == Catch::Approx(1.0));
    }

    SECTION("complete dephasing on |0> always registers outcome 0") {
        for (std::uint64_t seed : {1ull, 2ull, 3ull, 12345ull}) {
            PureTrajectory t = sample(repeated(preset("complete_dephasing", {}, 2), 3), zero, seed);
            CHECK(t.index == TrajectoryIndex{0, 0, 0});
        }
    }

    SECTION("identical seeds give identical trajectories") {
        ChannelSequence seq = repeated(preset("dephasing", {0.25}, 2), 5);
        PureTrajectory a = sample(seq, plus(), 777);
        PureTrajectory b = sample(seq, plus(), 777);
        CHECK(a.index == b.index);
        CHECK(a.weight == b.weight);
    }

    SECTION("weight equals the product of conditional probabilities") {
        SplitMix64 rng(35);
        for (std::uint64_t seed : {10ull, 20ull, 30ull}) {
            std::vector<KrausChannel> steps;
            for (int k = 0; k < 4; ++k) steps.push_back(support::random_channel(2, 2, rng));
            ChannelSequence seq(steps);
            StateVector psi = support::random_state(2, rng);
            PureTrajectory t = sample(seq, psi, seed);
            double product = 1.0;
            for (std::size_t k = 1; k < t.states.size(); ++k)
                product *= t.states[k].squaredNorm() / t.states[k - 1].squaredNorm();
            CHECK(std::abs(product - t.weight) <= 1e-12);
        }
    }

    SECTION("empirical frequencies track enumerated weights") {
        ChannelSequence seq = repeated(preset("dephasing", {0.25}, 2), 3);
        PureEnumeration en = enumerate(seq, plus());
        std::map<TrajectoryIndex, int> counts;
        const int n = 20000;
        for (int i = 0; i < n; ++i)
            counts[sample(seq, plus(), derived_seed(4242, static_cast<std::uint64_t>(i))).index]++;
        for (const PureTrajectory& t : en.trajectories) {
            double sigma = std::sqrt(t.weight * (1.0 - t.weight) * n);
            CHECK(std::abs(counts[t.index] - n * t.weight) <= 4.0 * sigma);
        }
    }

    SECTION("a numerically dead branch raises DeadEnd") {
        Tolerances loose;
        loose.complete = 1.0; // deliberately broken contraction, only to hit the guard
        KrausChannel shrink({0.25 * ComplexMatrix::Identity(2, 2)}, "shrink", loose);
        ChannelSequence seq(std::vector<KrausChannel>(12, shrink));
        CHECK_THROWS_AS(sample(seq, zero, 5, loose), DeadEnd);
    }
}

TEST_CASE("reconstruct_channel") {
    SECTION("single identity step returns the state") {
        DensityOperator rho = DensityOperator::maximally_mixed(2);
        ChannelSequence seq = repeated(preset("identity", {}, 2), 1);
        MixedEnumeration en = enumerate(seq, rho);
        DensityOperator sum = reconstruct_channel(seq, en.trajectories);
        CHECK((sum.matrix() - rho.matrix()).cwiseAbs().maxCoeff() <= 1e-15);
    }

    SECTION("complete dephasing of |+><+| sums to the channel output") {
        ChannelSequence seq = repeated(preset("complete_dephasing", {}, 2), 1);
        DensityOperator rho = DensityOperator::pure(plus());
        MixedEnumeration en = enumerate(seq, rho);
        DensityOperator sum = reconstruct_channel(seq, en.trajectories);
        CHECK((sum.matrix() - ComplexMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() <= 1e-15);
    }

    SECTION("random six-step qubit sequences recover the composite map") {
        SplitMix64 rng(33);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<KrausChannel> steps;
            for (int k = 0; k < 6; ++k) steps.push_back(support::random_channel(2, 2, rng));
            ChannelSequence seq(steps);
            DensityOperator rho = support::random_density(2, rng);
            MixedEnumeration en = enumerate(seq, rho);
            DensityOperator sum = reconstruct_channel(seq, en.trajectories);
            DensityOperator direct = compose_sequence(seq, rho);
            CHECK((sum.matrix() - direct.matrix()).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }

    SECTION("missing or duplicated trajectories are rejected") {
        ChannelSequence seq = repeated(preset("dephasing", {0.5}, 2), 2);
        MixedEnumeration en = enumerate(seq, DensityOperator::maximally_mixed(2));
        std::vector<MixedTrajectory> incomplete(en.trajectories.begin(),
                                                en.trajectories.end() - 1);
        CHECK_THROWS_AS(reconstruct_channel(seq, incomplete), IncompleteSet);
        std::vector<MixedTrajectory> duplicated = en.trajectories;
        duplicated.back() = duplicated.front();
        CHECK_THROWS_AS(reconstruct_channel(seq, duplicated), IncompleteSet);
    }
}

TEST_CASE("weights sum to one across preset scenarios") {
    SplitMix64 rng(34);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<KrausChannel> steps;
        int n = 2 + static_cast<int>(rng.next() % 4);
        for (int k = 0; k < n; ++k)
            steps.push_back(support::random_channel(2, 2 + static_cast<int>(rng.next() % 2), rng));
        PureEnumeration en = enumerate(ChannelSequence(steps), support::random_state(2, rng));
        CHECK(std::abs(en.total_weight - 1.0) <= 1e-10);
    }
}
