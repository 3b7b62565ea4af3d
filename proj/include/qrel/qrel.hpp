#pragma once

// Umbrella header.

#include "qrel/bell.hpp"
#include "qrel/composite.hpp"
#include "qrel/errors.hpp"
#include "qrel/hilbert.hpp"
#include "qrel/linalg.hpp"
#include "qrel/loglab.hpp"
#include "qrel/pipeline.hpp"
#include "qrel/serialize.hpp"
