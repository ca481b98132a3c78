#!/usr/bin/env python3
"""Rebuild data/geonames-2023-07-03 from the geonamescache 2.0.0 wheel.

The wheel ships GeoNames countryInfo and cities15000 extracts (CC-BY 4.0,
GeoNames) as JSON, dated 2023-07-03. This script writes them back out in the
published GeoNames tab-separated dump layouts so the C++ parsers read them
exactly as they would read a fresh download.

    pip download geonamescache==2.0.0 --no-deps -d /tmp/gnc
    python3 tools/make_geonames_snapshot.py /tmp/gnc/geonamescache-2.0.0-py3-none-any.whl
"""
import json
import sys
import zipfile
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "geonames-2023-07-03"


def country_rows(countries):
    yield ("#ISO\tISO3\tISO-Numeric\tfips\tCountry\tCapital\tArea(in sq km)\t"
           "Population\tContinent\ttld\tCurrencyCode\tCurrencyName\tPhone\t"
           "Postal Code Format\tPostal Code Regex\tLanguages\tgeonameid\t"
           "neighbours\tEquivalentFipsCode")
    for iso in sorted(countries):
        c = countries[iso]
        cols = [c["iso"], c["iso3"], str(c["isonumeric"]), c.get("fips", ""),
                c["name"], c.get("capital", ""), str(c.get("areakm2", "")),
                str(c.get("population", "")), c.get("continentcode", ""),
                c.get("tld", ""), c.get("currencycode", ""),
                c.get("currencyname", ""), str(c.get("phone", "")), "",
                c.get("postalcoderegex", "") or "", c.get("languages", ""),
                str(c["geonameid"]), c.get("neighbours", "") or "", ""]
        yield "\t".join(x.replace("\t", " ") for x in cols)


def city_rows(cities):
    for gid in sorted(cities, key=int):
        c = cities[gid]
        cols = [str(c["geonameid"]), c["name"], c["name"], "",
                repr(float(c["latitude"])), repr(float(c["longitude"])),
                "P", "", c["countrycode"], "", c.get("admin1code", "") or "",
                "", "", "", str(c["population"]), "", "",
                c.get("timezone", "") or "", ""]
        yield "\t".join(x.replace("\t", " ") for x in cols)


def main(wheel):
    z = zipfile.ZipFile(wheel)
    countries = json.loads(z.read("geonamescache/data/countries.json"))
    cities = json.loads(z.read("geonamescache/data/cities15000.json"))
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "countryInfo.txt").write_text(
        "\n".join(country_rows(countries)) + "\n", encoding="utf-8")
    (OUT / "cities15000.txt").write_text(
        "\n".join(city_rows(cities)) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv[1])
