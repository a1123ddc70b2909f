"""
Validation schemas for run configuration files and stability reports.
"""
from marshmallow import RAISE, Schema, fields, post_load, validate, validates_schema, ValidationError

from ..models.report import RunConfig


class RunConfigSchema(Schema):
    """Run configuration as read from a JSON file."""
    profile = fields.String(load_default='kh')
    beta = fields.Float(allow_none=True, load_default=None)
    sigma2 = fields.Integer(allow_none=True, load_default=None, validate=validate.OneOf([-1, 0, 1]))
    power = fields.Integer(allow_none=True, load_default=None, validate=validate.Range(min=1))
    ell = fields.Float(allow_none=True, load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    lambda_inf = fields.Float(allow_none=True, load_default=None,
                              validate=validate.Range(min=0, min_inclusive=False))
    epsilon = fields.Float(allow_none=True, load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    renorm_threshold = fields.Float(allow_none=True, load_default=None,
                                    validate=validate.Range(min=1, min_inclusive=False))
    lambda_points = fields.Integer(allow_none=True, load_default=None, validate=validate.Range(min=3))
    curve_lambda_points = fields.Integer(allow_none=True, load_default=None, validate=validate.Range(min=1))
    curve_lambda_max = fields.Float(allow_none=True, load_default=None)
    out = fields.String(load_default='out')
    curves = fields.Boolean(load_default=False)
    check = fields.Boolean(load_default=False)
    plot = fields.Boolean(load_default=True)
    png = fields.Boolean(load_default=False)
    quiet = fields.Boolean(load_default=False)

    class Meta:
        """Meta options for schema."""
        unknown = RAISE

    @validates_schema
    def validate_profile_parameters(self, data, **kwargs):
        # a sampled profile file carries no parameters of its own
        if data.get('profile') != 'kh' and data.get('beta') is None:
            raise ValidationError('beta is required for a profile file', 'beta')

    @post_load
    def make_run_config(self, data, **kwargs):
        return RunConfig(**data)


class VerdictsSchema(Schema):
    jones_grillakis_unstable = fields.Boolean(required=True)
    vk_verdict = fields.String(required=True, validate=validate.OneOf(['stable', 'unstable', 'not_applicable']))
    spectrum_on_imaginary_axis = fields.Boolean(allow_none=True)


class StabilityReportSchema(Schema):
    """Shape of report.json."""
    profile = fields.Dict(required=True)
    config = fields.Dict(required=True)
    P = fields.Integer(required=True, validate=validate.Range(min=0))
    Q = fields.Integer(required=True, validate=validate.Range(min=0))
    p_c = fields.Integer(required=True, validate=validate.Range(min=0))
    q_c = fields.Integer(required=True, validate=validate.Range(min=0))
    I1 = fields.Float(allow_none=True)
    I2 = fields.Float(allow_none=True)
    c = fields.Integer(required=True, validate=validate.OneOf([-1, 0, 1]))
    lower_bound = fields.Integer(required=True, validate=validate.Range(min=0))
    n_plus_N_detected = fields.Integer(required=True, validate=validate.Range(min=0))
    verdicts = fields.Nested(VerdictsSchema, required=True)
    consistency = fields.Dict()
    crossings = fields.Dict()
    essential_spectrum = fields.Dict()
    valid = fields.Boolean(required=True)
    failures = fields.List(fields.String())
