#pragma once

#include "opfr/common.hpp"
#include "opfr/dataset.hpp"
#include "opfr/evaluation.hpp"
#include "opfr/experiment.hpp"
#include "opfr/forest.hpp"
#include "opfr/metric.hpp"
#include "opfr/model_io.hpp"
#include "opfr/opf_cg.hpp"
#include "opfr/opf_knn.hpp"
#include "opfr/ranking.hpp"
