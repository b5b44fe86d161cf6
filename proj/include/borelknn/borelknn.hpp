#pragma once

#include "borelknn/ann/adversarial.hpp"
#include "borelknn/ann/index.hpp"
#include "borelknn/ann/projection.hpp"
#include "borelknn/ann/thermometer.hpp"
#include "borelknn/bench/consistency.hpp"
#include "borelknn/bench/cv.hpp"
#include "borelknn/bench/mm2.hpp"
#include "borelknn/bench/report.hpp"
#include "borelknn/borel/borel.hpp"
#include "borelknn/core/bitstring.hpp"
#include "borelknn/core/dataset.hpp"
#include "borelknn/core/error.hpp"
#include "borelknn/core/folds.hpp"
#include "borelknn/core/metric.hpp"
#include "borelknn/core/parallel.hpp"
#include "borelknn/core/random.hpp"
#include "borelknn/instability/instability.hpp"
#include "borelknn/knn/neighbors.hpp"
#include "borelknn/knn/rule.hpp"
#include "borelknn/knn/rules.hpp"
#include "borelknn/knn/sorted_index.hpp"
#include "borelknn/knn/vote.hpp"
#include "borelknn/version.hpp"
