#pragma once

// Umbrella header.

#include <seqrl/core.hpp>
#include <seqrl/envs.hpp>
#include <seqrl/eval.hpp>
#include <seqrl/experiment.hpp>
#include <seqrl/policy.hpp>
#include <seqrl/rewards.hpp>
#include <seqrl/rl.hpp>
#include <seqrl/train.hpp>
