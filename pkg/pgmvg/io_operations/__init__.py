# -*- coding: utf-8 -*-

"""Readers and writers for embeddings, identifier lists, labels and configs."""

from . import config_reader, embedding_reader_writer, text_reader_writer
