#include "behavior_epi/integrator.hpp"

#include <gtest/gtest.h>

namespace {

// Every integration performed by the unit tests must respect N + D = N(0) and positivity.
class InvariantAuditEnvironment : public ::testing::Environment
{
public:
    void SetUp() override
    {
        behavior_epi::reset_integration_audit();
    }

    void TearDown() override
    {
        const auto audit = behavior_epi::integration_audit();
        EXPECT_EQ(audit.violations, 0) << "integrations with invariant violations";
        EXPECT_LE(audit.max_conservation_defect, 1e-6);
        EXPECT_GE(audit.min_component_rel, -1e-9);
    }
};

} // namespace

int main(int argc, char** argv)
{
    ::testing::InitGoogleTest(&argc, argv);
    ::testing::AddGlobalTestEnvironment(new InvariantAuditEnvironment);
    return RUN_ALL_TESTS();
}
