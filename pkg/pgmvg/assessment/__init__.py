# -*- coding: utf-8 -*-

"""Double-Gaussian assessment of whether sub-classes should merge."""

from . import double_gaussian, merge_decision
