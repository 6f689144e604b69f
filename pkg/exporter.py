# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

import csv
import logging
from pathlib import Path
from typing import Iterable, Sequence


class AnalysisExporter(object):

    """
    Base abstract class for analysis exporters.
    Derived classes turn event logs into one CSV file in the output directory.
    """

    filename = 'analysis.csv'

    def __init__(self, name: str, output_dir):
        self.name = name
        self.output_dir = Path(output_dir)
        self.logger = logging.getLogger(name)

        # create the output dir if it doesn't exist
        self.output_dir.mkdir(parents=True, exist_ok=True)

    @property
    def path(self) -> Path:
        return self.output_dir / self.filename

    def write_rows(self, header: Sequence[str], rows: Iterable[Sequence]) -> int:
        """
        Write a CSV file with a header row.

        :return: the number of data rows written
        """
        count = 0
        with open(self.path, 'w', newline='', encoding='utf-8') as csv_file:
            writer = csv.writer(csv_file)
            writer.writerow(header)
            for row in rows:
                writer.writerow(['' if value is None else value for value in row])
                count += 1
        self.logger.info(f'Wrote {count} rows to {self.path}')
        return count

    def export(self, *args, **kwargs) -> Path:
        raise NotImplementedError()
