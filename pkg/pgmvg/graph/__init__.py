# -*- coding: utf-8 -*-

"""Speaker relationship graph: IPS/MIPS edge voting and union-find components."""

from . import speaker_graph, union_find
