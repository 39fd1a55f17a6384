#pragma once

#include "conbi/barycenter.hpp"
#include "conbi/bicombing.hpp"
#include "conbi/doss.hpp"
#include "conbi/error.hpp"
#include "conbi/extension.hpp"
#include "conbi/halfplane.hpp"
#include "conbi/improve.hpp"
#include "conbi/io.hpp"
#include "conbi/metric.hpp"
#include "conbi/moduli.hpp"
#include "conbi/rational.hpp"
#include "conbi/sampling.hpp"
#include "conbi/simplex.hpp"
#include "conbi/tight_span.hpp"
#include "conbi/transport.hpp"
#include "conbi/wasserstein.hpp"
