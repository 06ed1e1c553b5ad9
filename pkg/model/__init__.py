# Model package: mean-field, quantum fluctuations, critical scaling and ED
