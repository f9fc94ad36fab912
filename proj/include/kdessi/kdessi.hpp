#pragma once

#include "kdessi/adam.hpp"
#include "kdessi/archive.hpp"
#include "kdessi/butterworth.hpp"
#include "kdessi/common.hpp"
#include "kdessi/csv.hpp"
#include "kdessi/dataset.hpp"
#include "kdessi/distill.hpp"
#include "kdessi/ensemble.hpp"
#include "kdessi/harness.hpp"
#include "kdessi/losses.hpp"
#include "kdessi/metrics.hpp"
#include "kdessi/model_io.hpp"
#include "kdessi/nn_layers.hpp"
#include "kdessi/parallel.hpp"
#include "kdessi/peaks.hpp"
#include "kdessi/resnet1d.hpp"
#include "kdessi/segment.hpp"
#include "kdessi/signal_processing.hpp"
#include "kdessi/tensor.hpp"
#include "kdessi/timeseries.hpp"
#include "kdessi/train.hpp"
#include "kdessi/wavelet.hpp"
#include "kdessi/word_extraction.hpp"
