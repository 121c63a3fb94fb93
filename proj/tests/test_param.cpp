#include <gtest/gtest.h>

#include <cmath>

#include "pfml/errors.hpp"
#include "pfml/models.hpp"
#include "pfml/param.hpp"

namespace pfml {
namespace {

TEST(ParamVector, DefaultsToUnconstrained) {
  const ParamVector p({1.0, -2.0});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.transform(1), Transform::kUnconstrained);
  EXPECT_TRUE(p.is_valid());
}

TEST(ParamVector, LogPositiveRejectsNonPositive) {
  const std::vector<Transform> tags{Transform::kUnconstrained, Transform::kLogPositive};
  EXPECT_TRUE(ParamVector({1.0, 0.5}, tags).is_valid());
  EXPECT_FALSE(ParamVector({1.0, 0.0}, tags).is_valid());
  EXPECT_THROW(ParamVector({1.0, -1.0}, tags).validate(), Error);
}

TEST(ParamVector, NonFiniteIsInvalid) {
  EXPECT_FALSE(ParamVector({std::nan("")}).is_valid());
}

TEST(ParamVector, MismatchedTagsThrow) {
  EXPECT_THROW(ParamVector({1.0}, {Transform::kUnconstrained, Transform::kUnconstrained}), Error);
}

TEST(ParamVector, WithValuesKeepsTags) {
  const ParamVector p({1.0, 2.0}, {Transform::kUnconstrained, Transform::kLogPositive});
  const auto q = p.with_values({3.0, 4.0});
  EXPECT_EQ(q.transform(1), Transform::kLogPositive);
  EXPECT_EQ(q[0], 3.0);
}

TEST(ParamVector, ModelChecksLength) {
  const auto m = make_example1();
  EXPECT_NO_THROW(m->check_params(Example1Model::true_params()));
  EXPECT_THROW(m->check_params(ParamVector({25.0})), Error);
  EXPECT_THROW(m->check_params(m->make_params({25.0, -0.1})), Error);
}

}  // namespace
}  // namespace pfml
