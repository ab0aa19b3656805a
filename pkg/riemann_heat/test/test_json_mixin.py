import unittest
import csv
import io
import json
import numpy as np
from .. import json_mixin


class Sample(json_mixin.JsonMixin):

    json_atts = ["name", "count", "value", "flag"]

    def __init__(self, name="a", count=3, value=0.1, flag=True):
        self.name = name
        self.count = count
        self.value = value
        self.flag = flag


class TestFormatNumber(unittest.TestCase):

    def test_round_trip_precision(self):
        x = 1 / 3.0
        self.assertEqual(float(json_mixin.format_number(x)), x)

    def test_special_values(self):
        self.assertEqual(json_mixin.format_number(float("nan")), "nan")
        self.assertEqual(json_mixin.format_number(None), "")
        self.assertEqual(json_mixin.format_number(np.bool_(False)), "false")
        self.assertEqual(json_mixin.format_number(np.int64(7)), "7")


class TestJsonMixin(unittest.TestCase):

    def test_key_order(self):
        text = Sample().as_json()
        self.assertEqual(list(json.loads(text).keys()), Sample.json_atts)

    def test_non_finite_becomes_null(self):
        self.assertIsNone(json.loads(Sample(value=float("inf")).as_json())["value"])

    def test_numpy_scalars(self):
        decoded = json.loads(Sample(count=np.int64(5), value=np.float64(2.5), flag=np.bool_(True)).as_json())
        self.assertEqual(decoded, {"name": "a", "count": 5, "value": 2.5, "flag": True})

    def test_to_json_value(self):
        value = Sample("b", 9, float("nan"), False).to_json_value()
        self.assertEqual(list(value.items()), [("name", "b"), ("count", 9), ("value", None), ("flag", False)])

    def test_csv(self):
        self.assertEqual(Sample.csv_header(), "name,count,value,flag")
        self.assertEqual(Sample("x", 1, 0.5, False).csv_row(), "x,1,0.5,false")

    def test_csv_quotes_separators(self):
        row = Sample("k1 closed form, 100 pairs", 2, 0.25, True).csv_row()
        [fields] = list(csv.reader(io.StringIO(row)))
        self.assertEqual(fields, ["k1 closed form, 100 pairs", "2", "0.25", "true"])

