"""File sinks."""
from __future__ import annotations

import csv
from typing import Callable, Sequence

from ..model.frames import DataFrame
from .node import SinkNode


class CSVSinkNode(SinkNode):
    """Appends one row per frame to a CSV file.

    ``row(frame)`` returns a mapping for ``columns`` or ``None`` to skip the
    frame. Floats are written in shortest round-trip form.
    """

    def __init__(self, path, columns: Sequence[str], row: Callable[[DataFrame], dict | None],
                 name=None, **kw):
        super().__init__(name=name, **kw)
        self.path = path
        self.columns = list(columns)
        self.row = row
        self._fh = None
        self._writer = None
        self.rows = 0

    def _open(self):
        self._fh = open(self.path, "w", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(self.columns)

    def on_start(self):
        if self._fh is None:
            self._open()

    def on_push(self, frame):
        values = self.row(frame)
        if values is None:
            return
        if self._fh is None:
            self._open()
        self._writer.writerow([repr(v) if isinstance(v, float) else v for v in
                               (values[c] for c in self.columns)])
        self.rows += 1

    def on_stop(self):
        self.close()

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None
