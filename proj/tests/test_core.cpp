#include <doctest.h>

#include <random>

#include "gocc/core.hpp"

using namespace gocc;

TEST_CASE("ego grid has the expected dims") {
    const auto grid = VoxelGridSpec::ego_grid(0.4);
    CHECK(grid.dims() == Idx3(200, 200, 16));
    CHECK(grid.voxel_count() == 200u * 200u * 16u);
}

TEST_CASE("grid construction rejects bad ranges") {
    CHECK_THROWS_AS(VoxelGridSpec(Vec3(0, 0, 0), Vec3(0, 1, 1), Vec3(0.5, 0.5, 0.5)),
                    InvariantViolation);
    CHECK_THROWS_AS(VoxelGridSpec(Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(0.5, -0.5, 0.5)),
                    InvariantViolation);
    // 1.0 is not an integer multiple of 0.3
    CHECK_THROWS_AS(VoxelGridSpec(Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(0.3, 0.5, 0.5)),
                    InvariantViolation);
}

TEST_CASE("world_to_voxel on the ego grid") {
    const auto grid = VoxelGridSpec::ego_grid(0.4);
    CHECK(world_to_voxel(Vec3(-39.8, -39.8, -0.8), grid) == Idx3(0, 0, 0));
    CHECK(world_to_voxel(Vec3(39.99, -40.0, -1.0), grid) == Idx3(199, 0, 0));
    // max faces are out of range
    CHECK_FALSE(world_to_voxel(Vec3(40.0, 0.0, 0.0), grid).has_value());
    CHECK_FALSE(world_to_voxel(Vec3(0.0, 0.0, 5.4), grid).has_value());
    CHECK_FALSE(world_to_voxel(Vec3(-40.01, 0.0, 0.0), grid).has_value());
}

TEST_CASE("voxel_center examples and inverse property") {
    const auto grid = VoxelGridSpec::ego_grid(0.4);
    CHECK(voxel_center(Idx3(0, 0, 0), grid).isApprox(Vec3(-39.8, -39.8, -0.8), 1e-12));
    CHECK(voxel_center(Idx3(199, 199, 15), grid).isApprox(Vec3(39.8, 39.8, 5.2), 1e-12));
    CHECK_THROWS_AS(voxel_center(Idx3(200, 0, 0), grid), OutOfRange);

    std::mt19937_64 rng(17);
    for (int i = 0; i < 1000; ++i) {
        const Idx3 idx(int(rng() % 200), int(rng() % 200), int(rng() % 16));
        const auto back = world_to_voxel(voxel_center(idx, grid), grid);
        REQUIRE(back.has_value());
        CHECK(*back == idx);
    }
}

TEST_CASE("linear index ordering is x-major") {
    const auto grid = VoxelGridSpec::ego_grid(0.4);
    CHECK(grid.linear_index(Idx3(0, 0, 1)) == 1);
    CHECK(grid.linear_index(Idx3(0, 1, 0)) == 16);
    CHECK(grid.linear_index(Idx3(1, 0, 0)) == 200u * 16u);
    CHECK(grid.delinearize(grid.linear_index(Idx3(42, 13, 7))) == Idx3(42, 13, 7));
}

TEST_CASE("anchor round-trips through its 10-scalar form") {
    const InstanceAnchor a(Vec3(1, 2, 3), Vec3(2, 4, 1.5), std::sin(0.7), std::cos(0.7), 1.5, -0.5);
    const auto arr = a.to_array();
    REQUIRE(arr.size() == 10);
    const auto b = InstanceAnchor::from_array(arr);
    for (int i = 0; i < 10; ++i) CHECK(b.to_array()[i] == doctest::Approx(arr[i]).epsilon(1e-12));
}

TEST_CASE("anchor invariants") {
    CHECK_THROWS_AS(InstanceAnchor(Vec3(0, 0, 0), Vec3(1, -1, 1), 0, 1, 0, 0), InvariantViolation);
    CHECK_THROWS_AS(InstanceAnchor(Vec3(0, 0, 0), Vec3(1, 1, 1), 0.5, 0.5, 0, 0),
                    InvariantViolation);
    // slightly off-unit yaw is normalized
    const InstanceAnchor a(Vec3(0, 0, 0), Vec3(1, 1, 1), 0.0, 1.0 + 5e-7, 0, 0);
    CHECK(a.cos_yaw == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gaussian invariants") {
    CHECK_THROWS_AS(Gaussian3D(Vec3(0, 0, 0), Vec3(1, 1, 1), Quat(0.9, 0, 0, 0)),
                    InvariantViolation);
    // scale clamped to the floor by default, rejected with clamping off
    const Gaussian3D g(Vec3(0, 0, 0), Vec3(1e-6, 1, 1), Quat(1, 0, 0, 0));
    CHECK(g.scale.x() == doctest::Approx(0.01));
    CHECK_THROWS_AS(Gaussian3D(Vec3(0, 0, 0), Vec3(1e-6, 1, 1), Quat(1, 0, 0, 0), 0.01, false),
                    InvariantViolation);
}

TEST_CASE("prediction and occupancy invariants") {
    InstancePrediction p{0, 0.5, InstanceAnchor(Vec3(0, 0, 0), Vec3(1, 1, 1), 0, 1, 0, 0), {},
                         std::nullopt};
    CHECK_THROWS_AS(p.validate(), InvariantViolation);

    const auto grid = VoxelGridSpec::ego_grid(0.4);
    SparseInstanceOccupancy s;
    s.voxels = {3, 3};
    CHECK_THROWS_AS(s.validate(grid), InvariantViolation);
    s.voxels = {3, 2};
    CHECK_THROWS_AS(s.validate(grid), InvariantViolation);
    s.voxels = {0, 200u * 200u * 16u};
    CHECK_THROWS_AS(s.validate(grid), InvariantViolation);
}
