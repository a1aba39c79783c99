"""UI text constants for freeclark.

All user-facing strings of the command-line interface, grouped by command.
"""

# ============================================================================
# Application
# ============================================================================

APP_HELP = (
    "freeclark - free Aleksandrov-Clark theory on truncated Fock space: "
    "Schur, Herglotz and moment data, Clark intertwinings, free lifts and realizations."
)

VERSION_LINE = "freeclark {version}"

# ============================================================================
# Option help
# ============================================================================

HELP_D = "Number of variables (alphabet size, 1-9)"
HELP_M = "Coefficient matrix size"
HELP_DEG = "Degree of the random series"
HELP_RHO = "ℓ¹ coefficient norm of the random series, in (0, 1)"
HELP_SEED = "Seed for the random generator"
HELP_MODE = "Series kind: free or comm"
HELP_OUTPUT = "Write JSON output to this file instead of stdout"
HELP_N = "Truncation degree N (overrides the instance and settings)"
HELP_SUITE = "Verification suite: all, herglotz, gns, clark, lift or realize"
HELP_TOL = "Tolerance overriding every check's default"
HELP_MAX_LEN = "Largest word length (or |n|) of the moments to report"
HELP_EXTENSION = "Extension of V^b: 'tight' or 'random:<seed>'"
HELP_POINT = "JSON file holding an NC point {\"n\": .., \"Z\": [..]}"
HELP_COEFFS = "Report transfer-function coefficients up to this degree"
HELP_QUIET = "Print JSON only, without tables"
HELP_COLLIGATION = "Also write the colligation blocks [A B; C D] to this JSON file"

# ============================================================================
# Panels and tables
# ============================================================================

REPORT_TITLE = "Verification report ({suite})"
MOMENTS_TITLE = "Aleksandrov-Clark moments"
LIFT_TITLE = "Free lift"
REALIZE_TITLE = "Transfer-function realization"

STATUS_PASS = "[bold green]pass[/bold green]"
STATUS_FAIL = "[bold red]fail[/bold red]"

# ============================================================================
# Messages
# ============================================================================

MSG_WRITTEN = "[bold green]✓[/bold green] Wrote {path}"
MSG_SUITE_PASSED = "[bold green]✓ All {count} checks passed[/bold green]"
MSG_SUITE_FAILED = "[bold red]✗ {failed} of {count} checks failed[/bold red]"
MSG_NILPOTENT_CHECK = "Nilpotent self-check error: {error:.3e}"

ERROR_INPUT = "[bold red]Error:[/bold red] {message}"
ERROR_FILE_NOT_FOUND = "[bold red]Error:[/bold red] File not found: {path}"
ERROR_INVALID_JSON = "[bold red]Error:[/bold red] Invalid instance file {path}: {message}"
ERROR_EXTENSION = "Extension must be 'tight' or 'random:<seed>', got {value!r}"
ERROR_REALIZE_ARGS = "Give exactly one of --point or --coeffs"
ERROR_MODE_FREE = "This command needs a free instance"
ERROR_MODE_COMM = "This command needs a commutative instance"
ERROR_RESOLVENT = "[bold red]Resolvent failure:[/bold red] {message}"
ERROR_TRUNCATION = "Truncation N={N} exceeds the configured maximum word length {limit}"
