#pragma once

#include "papertype/models/baselines.hpp"
#include "papertype/models/ensembles.hpp"
#include "papertype/models/gnb.hpp"
#include "papertype/models/knn.hpp"
#include "papertype/models/model.hpp"
#include "papertype/models/serialize.hpp"
#include "papertype/models/svm.hpp"
#include "papertype/models/train.hpp"
#include "papertype/models/tree.hpp"
