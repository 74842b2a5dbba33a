#pragma once

#include "ntgnn/analysis.hpp"
#include "ntgnn/canon.hpp"
#include "ntgnn/dag_mlp.hpp"
#include "ntgnn/error.hpp"
#include "ntgnn/generators.hpp"
#include "ntgnn/graph.hpp"
#include "ntgnn/graph_io.hpp"
#include "ntgnn/matrices.hpp"
#include "ntgnn/merge_dag.hpp"
#include "ntgnn/pipeline.hpp"
#include "ntgnn/train.hpp"
#include "ntgnn/tree_builder.hpp"
#include "ntgnn/wl.hpp"
