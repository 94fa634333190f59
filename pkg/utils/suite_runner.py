# utils/suite_runner.py
"""
Script-mode runner for the root test_*.py files (pytest collects the same
test functions directly)
"""

import functools
import logging
import traceback
from typing import Callable, Sequence

logger = logging.getLogger(__name__)


def run_suite(title: str, tests: Sequence[Callable[[], None]]) -> int:
    """
    Run test functions, log a pass/fail summary and return an exit code

    Parametrized tests are passed as functools.partial objects, one per
    parameter set.

    Returns:
        0 when every test passed, 1 otherwise
    """
    logger.info("#" * 70)
    logger.info(f"# {title}")
    logger.info("#" * 70)

    results = {}
    for test in tests:
        name = _test_name(test)
        try:
            test()
            results[name] = True
        except Exception as e:
            logger.error(f"✗ {name} failed: {e!r}")
            traceback.print_exc()
            results[name] = False

    logger.info("=" * 70)
    logger.info("TEST SUMMARY")
    logger.info("=" * 70)
    for name, result in results.items():
        status = "✓ PASS" if result else "✗ FAIL"
        logger.info(f"{status} - {name}")

    passed = sum(1 for v in results.values() if v)
    logger.info(f"RESULT: {passed}/{len(results)} tests passed")
    return 0 if passed == len(results) else 1


def _test_name(test: Callable[[], None]) -> str:
    if isinstance(test, functools.partial):
        args = ', '.join(repr(arg) for arg in test.args)
        return f"{test.func.__name__}[{args}]"
    return test.__name__
