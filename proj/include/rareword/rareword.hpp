#pragma once

#include "align.hpp"
#include "annotate.hpp"
#include "config.hpp"
#include "corpus.hpp"
#include "dict.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "io.hpp"
#include "pipeline.hpp"
#include "postprocess.hpp"
#include "tokens.hpp"
#include "utf8.hpp"
