#pragma once

// Umbrella header.

#include "cidr/attribution.hpp"
#include "cidr/checkpoint.hpp"
#include "cidr/classifier.hpp"
#include "cidr/config.hpp"
#include "cidr/corpus.hpp"
#include "cidr/error.hpp"
#include "cidr/knapsack.hpp"
#include "cidr/metrics.hpp"
#include "cidr/parallel.hpp"
#include "cidr/pipeline.hpp"
#include "cidr/refinement.hpp"
#include "cidr/report.hpp"
#include "cidr/toy_corpus.hpp"
#include "cidr/toy_model.hpp"
