# -*- coding: utf-8 -*-
"""
Schema validation of XML verification reports using lxml.etree.XMLSchema.
"""
import logging
import os
from pathlib import Path
from typing import List, Tuple, Union

from lxml import etree

logger = logging.getLogger(__name__)


class XMLValidationError(Exception):
    """Raised when a report schema cannot be loaded or a report fails validation."""
    pass


def _load_schema(xsd_file_path: str) -> etree.XMLSchema:
    if not os.path.exists(xsd_file_path):
        raise XMLValidationError(f"XSD file not found: {xsd_file_path}")
    try:
        return etree.XMLSchema(etree.parse(xsd_file_path))
    except (etree.XMLSchemaParseError, etree.XMLSyntaxError) as e:
        raise XMLValidationError(
            f"Failed to parse XSD schema {xsd_file_path}: {e}"
        )


def validate_xml(
    xml_string: str, xsd_file_path: str
) -> Tuple[bool, List[str]]:
    """Validate a report document; returns the verdict and readable messages."""
    schema = _load_schema(xsd_file_path)
    try:
        document = etree.fromstring(xml_string.encode("utf-8"))
    except etree.XMLSyntaxError as e:
        return False, [f"Invalid XML syntax: {e}"]
    if schema.validate(document):
        return True, []
    messages = [
        f"Validation Error: Line {error.line}, Column {error.column} - "
        f"{error.message} (Type: {error.type_name})"
        for error in schema.error_log
    ]
    logger.debug("Schema validation produced %d messages", len(messages))
    return False, messages


def validate_xml_file(
    xml_path: Union[str, Path], xsd_file_path: str
) -> Tuple[bool, List[str]]:
    return validate_xml(Path(xml_path).read_text(encoding="utf-8"), xsd_file_path)
