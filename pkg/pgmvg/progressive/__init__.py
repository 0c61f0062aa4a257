# -*- coding: utf-8 -*-

"""Progressive growth of k: edge cases, iteration state and the driver."""

from . import edge_cases, iteration_state, pgmvg_clustering
