#pragma once

// Bayesian quantile-based portfolio selection: posterior predictive return
// distributions under Jeffreys and conjugate priors, VaR/CVaR and general
// coherent risk evaluation, global minimum quantile portfolios with existence
// checks, efficient frontiers, and the Monte Carlo / rolling-backtest
// experiment harnesses.

#include "bqp/backtest.hpp"
#include "bqp/distributions.hpp"
#include "bqp/errors.hpp"
#include "bqp/io.hpp"
#include "bqp/optimizer.hpp"
#include "bqp/predictive.hpp"
#include "bqp/returns.hpp"
#include "bqp/risk.hpp"
#include "bqp/rng.hpp"
#include "bqp/simulation.hpp"
