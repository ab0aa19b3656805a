"""
Helper mixin for controlled serialization of result records
to json objects and csv rows sharing one ordered key set.
"""

import csv
import io
import json
import math
import numbers
from collections import OrderedDict
import numpy as np


def format_number(value):
    "17 significant digits so doubles survive a text round trip."
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return "%.17g" % value
    return str(value)


def json_scalar(value):
    "Plain python value for json; inf and nan become None."
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, float):
        return float(value) if math.isfinite(value) else None
    return value


class JsonMixin(object):

    # ordered sequence of json compatible atts to encode
    json_atts = []

    def to_json_value(self):
        "Encode object as json compatible value."
        result = OrderedDict()
        for att in self.json_atts:
            result[att] = json_scalar(getattr(self, att))
        return result

    def as_json(self):
        "Convert to json string, keys in json_atts order."
        return json.dumps(self.to_json_value())

    @classmethod
    def _csv_line(cls, row=None):
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=cls.json_atts, lineterminator="\n")
        if row is None:
            writer.writeheader()
        else:
            writer.writerow(row)
        return buffer.getvalue()[:-1]

    @classmethod
    def csv_header(cls):
        return cls._csv_line()

    def csv_row(self):
        return self._csv_line(OrderedDict(
            (att, format_number(getattr(self, att))) for att in self.json_atts))
