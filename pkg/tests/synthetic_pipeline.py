"""Seeded corpus+prices generator for the end-to-end pipeline tests.

Five driver keywords' counts linearly determine the volatility label
(plus Gaussian noise, sigma = 0.1); an optional company-level market
component moves both the pre-issue volatility (which the market
features estimate) and the label.
"""

import datetime as dt
import math

import numpy as np

from conftest import make_doc, make_lexicon, trading_dates
from riskvol.market import PriceSeries

N_DRIVERS = 5
N_FILLERS = 50
PRE_DAYS = 260
POST_DAYS = 280
BASE_LEVEL = -4.2
LABEL_NOISE = 0.1


def build_pipeline_corpus(seed, driver_weight, market_std, n_docs=240, filler_p=0.15):
    """Returns (docs, prices, lexicon, true_labels)."""
    rng = np.random.default_rng(seed)
    drivers = [f"driver{i}" for i in range(N_DRIVERS)]
    fillers = [f"filler{i:02d}" for i in range(N_FILLERS)]
    dates = trading_dates(dt.date(2012, 1, 2), PRE_DAYS + POST_DAYS + 1)
    issue = dates[PRE_DAYS + 1]
    mean_total = N_DRIVERS * 4.0
    docs, prices, true_labels = [], {}, {}
    for i in range(n_docs):
        company, doc_id = f"c{i:03d}", f"d{i:03d}"
        counts = rng.integers(0, 9, N_DRIVERS)
        market_part = rng.normal(0.0, market_std)
        noise = rng.normal(0.0, LABEL_NOISE)
        label = BASE_LEVEL + driver_weight * (counts.sum() - mean_total) + market_part + noise
        true_labels[doc_id] = label
        tokens = []
        for driver, count in zip(drivers, counts):
            tokens += [driver] * int(count)
        present = rng.random(N_FILLERS) < filler_p
        tokens += [f for f, p in zip(fillers, present) if p]
        tokens.append("anchor")
        rng.shuffle(tokens)
        docs.append(
            make_doc(doc_id, tokens, company_id=company, issue_date=issue, sector="fin")
        )
        pre_sigma = math.exp(BASE_LEVEL + market_part)
        post_sigma = math.exp(label)
        returns = np.concatenate([
            rng.normal(0.0, pre_sigma, PRE_DAYS),
            rng.normal(0.0, post_sigma, POST_DAYS),
        ])
        levels = 40.0 * np.exp(np.concatenate([[0.0], returns]).cumsum())
        prices[company] = PriceSeries(company, dates, levels)
    lexicon = make_lexicon(*(drivers + fillers))
    return docs, prices, lexicon, true_labels
