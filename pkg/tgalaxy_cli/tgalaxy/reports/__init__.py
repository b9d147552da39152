from tgalaxy.reports.models import REPORT_MODELS
from tgalaxy.reports.tables import render_table
