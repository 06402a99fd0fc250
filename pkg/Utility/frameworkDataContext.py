class CustomContext:
    """Run-wide singleton shared by the CLI and the behave hooks."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance.run_data = {}
            cls._instance.calibrations = {}
            cls._instance.check_results = {}
        return cls._instance

    @staticmethod
    def set_run_data(key, value):
        CustomContext().run_data[key] = value

    @staticmethod
    def get_run_data(key):
        return CustomContext().run_data.get(key)

    def record_calibration(self, name, selected):
        """Calibration selection made during a verify run."""
        self.calibrations[name] = selected

    def get_calibration(self, name):
        return self.calibrations.get(name)

    def record_check(self, check_id, status):
        self.check_results[check_id] = status

    def failed_checks(self):
        return sorted(check_id for check_id, status in self.check_results.items() if status != "pass")

    def reset_run(self):
        self.calibrations = {}
        self.check_results = {}
