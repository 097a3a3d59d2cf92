#pragma once

#include "gazechain/amount.hpp"
#include "gazechain/attestation.hpp"
#include "gazechain/bytes.hpp"
#include "gazechain/error.hpp"
#include "gazechain/escrow.hpp"
#include "gazechain/gaze_data.hpp"
#include "gazechain/ledger.hpp"
#include "gazechain/protocol.hpp"
#include "gazechain/report.hpp"
#include "gazechain/sha3.hpp"
