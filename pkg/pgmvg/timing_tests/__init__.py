# -*- coding: utf-8 -*-

"""Consistent timing runs of the clustering engine."""

from . import clustering_timing
