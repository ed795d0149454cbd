#pragma once

#include "xnorconv/bench.hpp"
#include "xnorconv/binarizer.hpp"
#include "xnorconv/error.hpp"
#include "xnorconv/packer.hpp"
#include "xnorconv/parallel.hpp"
#include "xnorconv/pipeline.hpp"
#include "xnorconv/reference.hpp"
#include "xnorconv/scaling.hpp"
#include "xnorconv/tensor.hpp"
#include "xnorconv/verify.hpp"
#include "xnorconv/xnor_engine.hpp"
