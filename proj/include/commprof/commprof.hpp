#pragma once

#include "commprof/core/error.hpp"
#include "commprof/core/rational.hpp"
#include "commprof/cost/builtin_frameworks.hpp"
#include "commprof/cost/config_io.hpp"
#include "commprof/cost/expr.hpp"
#include "commprof/cost/framework.hpp"
#include "commprof/cost/matmul_partition.hpp"
#include "commprof/cost/types.hpp"
#include "commprof/ir/aggregate.hpp"
#include "commprof/ir/block_tree.hpp"
#include "commprof/ir/context.hpp"
#include "commprof/ir/label.hpp"
#include "commprof/ir/report.hpp"
#include "commprof/ops/lowering.hpp"
#include "commprof/ops/secure_ops.hpp"
#include "commprof/autograd/shape.hpp"
#include "commprof/autograd/tensor.hpp"
#include "commprof/autograd/functional.hpp"
#include "commprof/nn/modules.hpp"
#include "commprof/nn/spec.hpp"
#include "commprof/nn/optim.hpp"
#include "commprof/nn/zoo.hpp"
#include "commprof/nn/session.hpp"
#include "commprof/report/grouping.hpp"
#include "commprof/report/profile.hpp"
